import numpy as np
import pytest

from conftest import dense_to_matrix, random_corpus
from hiertax.errors import InputError
from hiertax.flat import em_run, init_assignments, root_noise_search, select_k
from hiertax.likelihood import flat_log_ml
from hiertax.types import FeaturePartition, ModelConfig, SparseDocMatrix, stats_from_assignment


def two_block_corpus(rng, docs_per_cluster=30, features=8, tokens=25):
    """Two multinomials with disjoint supports: separable by construction."""
    half = features // 2
    theta0 = np.concatenate([rng.dirichlet(np.ones(half)), np.zeros(features - half)])
    theta1 = np.concatenate([np.zeros(half), rng.dirichlet(np.ones(features - half))])
    dense = np.concatenate(
        [
            rng.multinomial(tokens, theta0, size=docs_per_cluster),
            rng.multinomial(tokens, theta1, size=docs_per_cluster),
        ]
    )
    truth = np.array([0] * docs_per_cluster + [1] * docs_per_cluster)
    return dense_to_matrix(dense), truth


class TestInitAssignments:
    def test_k_one_puts_everything_in_cluster_zero(self, rng):
        data = random_corpus(rng, docs=9)
        assert set(init_assignments(data, 1, 0)) == {0}

    def test_k_equals_docs_is_a_permutation(self, rng):
        data = random_corpus(rng, docs=7)
        assign = init_assignments(data, 7, 0)
        assert sorted(assign) == list(range(7))

    def test_every_cluster_nonempty(self, rng):
        data = random_corpus(rng, docs=40, features=6)
        for seed in range(5):
            assign = init_assignments(data, 5, seed)
            assert set(assign) == set(range(5))

    def test_deterministic_given_seed(self, rng):
        data = random_corpus(rng, docs=100, features=10)
        a = init_assignments(data, 3, 42)
        b = init_assignments(data, 3, 42)
        np.testing.assert_array_equal(a, b)

    def test_k_larger_than_corpus_rejected(self, rng):
        data = random_corpus(rng, docs=4)
        with pytest.raises(InputError):
            init_assignments(data, 5, 0)


class TestEmRun:
    def test_disjoint_support_recovered_exactly(self, rng):
        from hiertax.evaluate import nmi

        data, truth = two_block_corpus(rng)
        cfg = ModelConfig(k_range=(2, 2), restarts=1)
        part = FeaturePartition.all_useful(data.num_features)
        flat = em_run(data, 2, part, cfg, seed=1)
        assert flat.k == 2
        assert nmi(list(flat.assignments), truth) == pytest.approx(1.0)

    def test_k_one_converges_immediately(self, rng):
        data = random_corpus(rng, docs=10, features=5)
        cfg = ModelConfig()
        part = FeaturePartition.all_useful(5)
        flat = em_run(data, 1, part, cfg, seed=0)
        assert flat.k == 1
        (stats,) = flat.stats
        assert stats.doc_count == 10
        assert flat.score == pytest.approx(flat_log_ml([stats], part, cfg), abs=1e-12)

    def test_identical_rows_co_assigned(self, rng):
        row = {0: 3, 2: 1}
        other = {1: 4}
        data = SparseDocMatrix.from_rows([row, other, row, row, other], 3)
        cfg = ModelConfig()
        flat = em_run(data, 2, FeaturePartition.all_useful(3), cfg, seed=3)
        a = flat.assignments
        assert a[0] == a[2] == a[3]
        assert a[1] == a[4]

    def test_score_not_below_initial_assignment(self, rng):
        data = random_corpus(rng, docs=60, features=12)
        cfg = ModelConfig()
        part = FeaturePartition.all_useful(12)
        for seed in range(4):
            init = init_assignments(data, 4, seed)
            init_score = flat_log_ml(stats_from_assignment(data, init, 4), part, cfg)
            flat = em_run(data, 4, part, cfg, seed=seed)
            assert flat.score >= init_score - 1e-9

    def test_deterministic(self, rng):
        data = random_corpus(rng, docs=50, features=10)
        cfg = ModelConfig()
        part = FeaturePartition.all_useful(10)
        a = em_run(data, 3, part, cfg, seed=11)
        b = em_run(data, 3, part, cfg, seed=11)
        assert a.assignments == b.assignments
        assert a.score == b.score

    def test_dropped_clusters_keep_groups_intact(self, rng):
        # request far more clusters than the data supports; surviving
        # clusters must be a relabelling of non-empty groups
        data, _ = two_block_corpus(rng, docs_per_cluster=15)
        cfg = ModelConfig()
        flat = em_run(data, 8, FeaturePartition.all_useful(data.num_features), cfg, seed=5)
        assert flat.k <= 8
        assert set(flat.assignments) == set(range(flat.k))
        assert sum(s.doc_count for s in flat.stats) == data.num_docs


class TestSelectK:
    def test_fixed_range_single_restart_equals_em_run(self, rng):
        data = random_corpus(rng, docs=30, features=8)
        cfg = ModelConfig(k_range=(3, 3), restarts=1, seed=9)
        part = FeaturePartition.all_useful(8)
        direct = em_run(data, 3, part, cfg, seed=(9, 3, 0))
        chosen = select_k(data, part, cfg)
        assert chosen.assignments == direct.assignments
        assert chosen.score == direct.score

    def test_single_population_selects_one_cluster(self, rng):
        data = random_corpus(rng, docs=80, features=10, mean_tokens=40)
        cfg = ModelConfig(k_range=(1, 4), restarts=2, seed=0)
        part = FeaturePartition.all_useful(10)
        assert select_k(data, part, cfg).k == 1

    def test_score_dominates_every_run(self, rng):
        data, _ = two_block_corpus(rng, docs_per_cluster=20)
        cfg = ModelConfig(k_range=(1, 4), restarts=2, seed=1)
        part = FeaturePartition.all_useful(data.num_features)
        best = select_k(data, part, cfg)
        from hiertax.flat import run_seed

        for k in range(1, 5):
            for r in range(2):
                run = em_run(data, k, part, cfg, run_seed(1, k, r))
                assert best.score >= run.score - 1e-9

    def test_k_range_beyond_corpus_rejected(self, rng):
        data = random_corpus(rng, docs=3)
        with pytest.raises(InputError):
            select_k(data, FeaturePartition.all_useful(8), ModelConfig(k_range=(1, 5)))


class TestRootNoiseSearch:
    def _clustered(self, rng, dense, k, truth):
        data = dense_to_matrix(dense)
        part = FeaturePartition.all_useful(data.num_features)
        cfg = ModelConfig()
        stats = stats_from_assignment(data, truth, k)
        from hiertax.flat import FlatClustering

        flat = FlatClustering(
            k=k,
            assignments=tuple(int(v) for v in truth),
            stats=tuple(stats),
            partition=part,
            score=flat_log_ml(stats, part, cfg),
        )
        return data, flat, cfg

    def test_flat_feature_moves_to_noise(self, rng):
        # two clusters differing on features 0/1, plus a heavy feature with
        # identical distribution everywhere: the shared set should take it
        block = np.array([20, 0, 30])
        dense = np.concatenate(
            [
                np.tile(block, (25, 1)),
                np.tile(np.array([0, 20, 30]), (25, 1)),
            ]
        )
        truth = np.array([0] * 25 + [1] * 25)
        data, flat, cfg = self._clustered(rng, dense, 2, truth)
        found = root_noise_search(data, flat, cfg)
        assert 2 in found.noise
        assert found.noise <= {2}
        assert flat_log_ml(flat.stats, found, cfg) >= flat.score

    def test_disjoint_supports_keep_everything_useful(self, rng):
        data, truth = two_block_corpus(rng, docs_per_cluster=25)
        dense_truth = truth
        _, flat, cfg = self._clustered(
            rng,
            np.stack([[row.get(f, 0) for f in range(data.num_features)] for row in data.rows]),
            2,
            dense_truth,
        )
        found = root_noise_search(data, flat, cfg)
        assert found.noise == frozenset()

    def test_degenerate_single_cluster_scan(self, rng):
        data = random_corpus(rng, docs=12, features=5)
        truth = np.zeros(12, dtype=int)
        data2, flat, cfg = self._clustered(
            rng,
            np.stack([[row.get(f, 0) for f in range(5)] for row in data.rows]),
            1,
            truth,
        )
        found = root_noise_search(data2, flat, cfg)
        # the scan covers both extremes; the result can never score below them
        score = flat_log_ml(flat.stats, found, cfg)
        empty = flat_log_ml(flat.stats, FeaturePartition.all_useful(5), cfg)
        full = flat_log_ml(flat.stats, FeaturePartition.from_noise(range(5), 5), cfg)
        assert score >= max(empty, full) - 1e-9
