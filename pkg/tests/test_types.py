import numpy as np
import pytest

from conftest import matrix_to_dense, random_corpus
from hiertax.errors import InputError
from hiertax.types import (
    ClusterStats,
    FeaturePartition,
    Lexicon,
    ModelConfig,
    SparseDocMatrix,
    add_stats,
    combine_stats,
    project,
    stats_from_assignment,
)


class TestLexicon:
    def test_ids_are_positions(self):
        lex = Lexicon(("apple", "pear", "fig"))
        assert lex.size == 3
        assert lex.id_of("pear") == 1
        assert lex.term_of(2) == "fig"

    def test_duplicate_terms_rejected(self):
        with pytest.raises(InputError):
            Lexicon(("a", "b", "a"))


class TestSparseDocMatrix:
    def test_totals_match_rows(self):
        data = SparseDocMatrix.from_rows([{0: 2}, {1: 3}], 2)
        assert data.doc_totals == (2, 3)
        assert data.num_docs == 2

    def test_zero_counts_rejected(self):
        with pytest.raises(InputError):
            SparseDocMatrix.from_rows([{0: 0}], 1)

    def test_feature_out_of_range_rejected(self):
        with pytest.raises(InputError):
            SparseDocMatrix.from_rows([{5: 1}], 2)

    def test_csr_round_trip(self, rng):
        data = random_corpus(rng, docs=13, features=6)
        indptr, indices, values = data.csr_arrays
        dense = np.zeros((data.num_docs, data.num_features))
        for i in range(data.num_docs):
            for p in range(indptr[i], indptr[i + 1]):
                dense[i, indices[p]] = values[p]
        np.testing.assert_array_equal(dense, matrix_to_dense(data))


class TestStatsFromAssignment:
    def test_singleton_partition(self):
        data = SparseDocMatrix.from_rows([{0: 2}, {1: 3}], 2)
        s0, s1 = stats_from_assignment(data, [0, 1], 2)
        assert s0.term_counts == {0: 2} and s0.total_tokens == 2 and s0.doc_count == 1
        assert s1.term_counts == {1: 3} and s1.total_tokens == 3 and s1.doc_count == 1

    def test_all_in_one(self):
        data = SparseDocMatrix.from_rows([{0: 2}, {1: 3}], 2)
        (s,) = stats_from_assignment(data, [0, 0], 1)
        assert s.term_counts == {0: 2, 1: 3}
        assert s.total_tokens == 5
        assert s.doc_count == 2

    def test_column_sums_preserved(self, rng):
        data = random_corpus(rng, docs=20, features=7)
        assign = rng.integers(0, 3, size=20)
        stats = stats_from_assignment(data, assign, 3)
        dense = matrix_to_dense(data)
        # dense accumulation oracle
        expected = np.zeros((3, 7), dtype=np.int64)
        for i, k in enumerate(assign):
            expected[k] += dense[i]
        for k, s in enumerate(stats):
            got = np.zeros(7, dtype=np.int64)
            for f, c in s.term_counts.items():
                got[f] = c
            np.testing.assert_array_equal(got, expected[k])
        assert sum(s.doc_count for s in stats) == 20

    def test_sparse_and_dense_paths_agree(self, rng):
        data = random_corpus(rng, docs=15, features=9)
        assign = rng.integers(0, 4, size=15)
        a = stats_from_assignment(data, assign, 4, dense_limit=0)
        b = stats_from_assignment(data, assign, 4, dense_limit=10_000)
        assert [s.term_counts for s in a] == [s.term_counts for s in b]

    def test_out_of_range_assignment(self):
        data = SparseDocMatrix.from_rows([{0: 1}], 1)
        with pytest.raises(InputError):
            stats_from_assignment(data, [2], 2)


class TestStatsAlgebra:
    def test_add_identity(self):
        a = ClusterStats.from_counts({0: 2, 3: 1}, 2)
        out = add_stats(a, ClusterStats.empty())
        assert out.term_counts == a.term_counts
        assert out.total_tokens == a.total_tokens
        assert out.doc_count == a.doc_count

    def test_add_forced_arithmetic(self):
        a = ClusterStats.from_counts({0: 2}, 1)
        b = ClusterStats.from_counts({0: 1, 1: 4}, 1)
        out = add_stats(a, b)
        assert out.term_counts == {0: 3, 1: 4}
        assert out.total_tokens == 7

    def test_fold_order_free(self, rng):
        data = random_corpus(rng, docs=10, features=5)
        singles = stats_from_assignment(data, list(range(10)), 10)
        (reference,) = stats_from_assignment(data, [0] * 10, 1)
        for perm_seed in range(3):
            order = np.random.default_rng(perm_seed).permutation(10)
            folded = combine_stats(singles[i] for i in order)
            assert folded.term_counts == reference.term_counts
            assert folded.doc_count == reference.doc_count

    def test_pairwise_merge_equals_scratch_recount(self, rng):
        data = random_corpus(rng, docs=18, features=6)
        assign = rng.integers(0, 3, size=18)
        stats = stats_from_assignment(data, assign, 3)
        merged = add_stats(stats[0], stats[2])
        joined = np.where(np.asarray(assign) == 2, 0, assign)
        scratch = stats_from_assignment(data, joined, 3)[0]
        assert merged.term_counts == scratch.term_counts
        assert merged.total_tokens == scratch.total_tokens
        assert merged.doc_count == scratch.doc_count

    def test_project_identity_and_empty(self, rng):
        data = random_corpus(rng, docs=6, features=5)
        (s,) = stats_from_assignment(data, [0] * 6, 1)
        same = project(s, range(5))
        assert same.term_counts == s.term_counts
        assert same.total_tokens == s.total_tokens
        assert same.doc_count == s.doc_count
        nothing = project(s, [])
        assert nothing.term_counts == {}
        assert nothing.total_tokens == 0
        assert nothing.doc_count == s.doc_count

    def test_project_partition_totals(self, rng):
        for trial in range(20):
            counts = {int(f): int(c) for f, c in enumerate(rng.integers(0, 9, size=8)) if c}
            s = ClusterStats.from_counts(counts, 3)
            mask = rng.random(8) < 0.5
            part_a = [f for f in range(8) if mask[f]]
            part_b = [f for f in range(8) if not mask[f]]
            assert (
                project(s, part_a).total_tokens + project(s, part_b).total_tokens
                == s.total_tokens
            )


class TestFeaturePartition:
    def test_from_noise(self):
        p = FeaturePartition.from_noise([1, 3], 5)
        assert p.noise == {1, 3}
        assert p.useful == {0, 2, 4}
        assert p.num_features == 5

    def test_overlap_rejected(self):
        with pytest.raises(InputError):
            FeaturePartition(noise=frozenset({1}), useful=frozenset({1, 2}))


class TestModelConfig:
    def test_defaults_valid(self):
        cfg = ModelConfig()
        assert cfg.noise_prefix_rule == "first-decrease"

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"alpha": 0.0},
            {"beta": -1.0},
            {"sigma": (1.0, 0.0)},
            {"k_range": (0, 3)},
            {"k_range": (4, 2)},
            {"restarts": 0},
            {"em_max_iters": 0},
            {"noise_prefix_rule": "other"},
        ],
    )
    def test_invalid_configs_rejected(self, kwargs):
        with pytest.raises(InputError):
            ModelConfig(**kwargs)
