"""Core data model: lexicon, sparse corpus, cluster statistics, merge trees.

Every type here is an immutable value and every operation is pure, so
instances can be shared across threads without synchronization. Counts are
integer token counts throughout; fractional weighting is deliberately not
supported.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import InputError, InternalError

# Feature count below which per-cluster aggregation goes through dense
# arrays; above it, plain dicts avoid allocating clusters x features.
DENSE_ACCUMULATION_LIMIT = 1024


@dataclass(frozen=True)
class Lexicon:
    """Ordered, duplicate-free term list; list position is the feature id."""

    terms: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        if len(set(self.terms)) != len(self.terms):
            raise InputError("lexicon contains duplicate terms")

    @property
    def size(self) -> int:
        return len(self.terms)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.terms)}

    def id_of(self, term: str) -> int:
        try:
            return self._index[term]
        except KeyError:
            raise InputError(f"unknown term: {term!r}") from None

    def term_of(self, fid: int) -> str:
        return self.terms[fid]


@dataclass(frozen=True)
class SparseDocMatrix:
    """Document-by-term count matrix stored as one sparse map per document.

    Zeros are absent, never stored; every stored count is >= 1.
    """

    rows: tuple[Mapping[int, int], ...]
    num_features: int

    @classmethod
    def from_rows(cls, rows: Sequence[Mapping[int, int]], num_features: int) -> "SparseDocMatrix":
        checked = []
        for i, row in enumerate(rows):
            clean: dict[int, int] = {}
            for fid, count in row.items():
                fid = int(fid)
                count = int(count)
                if count < 1:
                    raise InputError(f"document {i}: count for feature {fid} must be >= 1")
                if not 0 <= fid < num_features:
                    raise InputError(f"document {i}: feature id {fid} out of range")
                clean[fid] = count
            checked.append(clean)
        return cls(rows=tuple(checked), num_features=num_features)

    @property
    def num_docs(self) -> int:
        return len(self.rows)

    @cached_property
    def doc_totals(self) -> tuple[int, ...]:
        return tuple(sum(row.values()) for row in self.rows)

    @cached_property
    def csr_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(indptr, indices, data) in CSR layout, features sorted per row."""
        indptr = np.zeros(self.num_docs + 1, dtype=np.int64)
        indices: list[int] = []
        data: list[float] = []
        for i, row in enumerate(self.rows):
            for fid in sorted(row):
                indices.append(fid)
                data.append(float(row[fid]))
            indptr[i + 1] = len(indices)
        return indptr, np.asarray(indices, dtype=np.int64), np.asarray(data, dtype=np.float64)


@dataclass(frozen=True)
class ClusterStats:
    """Additive sufficient statistics of a document cluster."""

    term_counts: Mapping[int, int]
    total_tokens: int
    doc_count: int

    @classmethod
    def from_counts(cls, term_counts: Mapping[int, int], doc_count: int) -> "ClusterStats":
        clean = {int(f): int(c) for f, c in term_counts.items() if c != 0}
        if any(c < 0 for c in clean.values()) or doc_count < 0:
            raise InputError("cluster statistics must be non-negative")
        return cls(term_counts=clean, total_tokens=sum(clean.values()), doc_count=doc_count)

    @classmethod
    def empty(cls) -> "ClusterStats":
        return cls(term_counts={}, total_tokens=0, doc_count=0)


def add_stats(a: ClusterStats, b: ClusterStats) -> ClusterStats:
    """Componentwise sum; commutative and associative."""
    counts = dict(a.term_counts)
    for fid, c in b.term_counts.items():
        counts[fid] = counts.get(fid, 0) + c
    return ClusterStats(
        term_counts=counts,
        total_tokens=a.total_tokens + b.total_tokens,
        doc_count=a.doc_count + b.doc_count,
    )


def combine_stats(stats: Iterable[ClusterStats]) -> ClusterStats:
    out = ClusterStats.empty()
    for s in stats:
        out = add_stats(out, s)
    return out


def project(s: ClusterStats, feats: Iterable[int]) -> ClusterStats:
    """Restriction of the term counts to a feature subset.

    The token total is recomputed from the surviving counts; the document
    count is unchanged (projection does not remove documents).
    """
    keep = set(feats)
    counts = {f: c for f, c in s.term_counts.items() if f in keep}
    return ClusterStats(term_counts=counts, total_tokens=sum(counts.values()), doc_count=s.doc_count)


def counts_vector(s: ClusterStats, feats: np.ndarray) -> np.ndarray:
    """Counts of ``s`` aligned with the feature-id array ``feats`` (float64)."""
    get = s.term_counts.get
    return np.array([get(int(f), 0) for f in feats], dtype=np.float64)


def stats_from_assignment(
    data: SparseDocMatrix,
    assignments: Sequence[int],
    k: int,
    dense_limit: int = DENSE_ACCUMULATION_LIMIT,
) -> list[ClusterStats]:
    """Per-cluster sufficient statistics for a hard document assignment."""
    assign = np.asarray(assignments, dtype=np.int64)
    if assign.shape[0] != data.num_docs:
        raise InputError("assignment length does not match document count")
    if assign.size and (assign.min() < 0 or assign.max() >= k):
        raise InputError("assignment id out of range")
    doc_counts = np.bincount(assign, minlength=k)

    if data.num_features <= dense_limit:
        mat = np.zeros((k, data.num_features), dtype=np.int64)
        indptr, indices, values = data.csr_arrays
        row_of = np.repeat(np.arange(data.num_docs), np.diff(indptr))
        np.add.at(mat, (assign[row_of], indices), values.astype(np.int64))
        out = []
        for c in range(k):
            nz = np.nonzero(mat[c])[0]
            counts = {int(f): int(mat[c, f]) for f in nz}
            out.append(ClusterStats(counts, int(mat[c].sum()), int(doc_counts[c])))
        return out

    maps: list[dict[int, int]] = [{} for _ in range(k)]
    for i, row in enumerate(data.rows):
        m = maps[assign[i]]
        for fid, c in row.items():
            m[fid] = m.get(fid, 0) + c
    return [
        ClusterStats(maps[c], sum(maps[c].values()), int(doc_counts[c])) for c in range(k)
    ]


@dataclass(frozen=True)
class FeaturePartition:
    """Disjoint split of the feature ids into shared ("noise") and
    cluster-specific ("useful") sets covering the whole lexicon."""

    noise: frozenset[int]
    useful: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "noise", frozenset(self.noise))
        object.__setattr__(self, "useful", frozenset(self.useful))
        if self.noise & self.useful:
            raise InputError("noise and useful feature sets overlap")

    @classmethod
    def all_useful(cls, num_features: int) -> "FeaturePartition":
        return cls(noise=frozenset(), useful=frozenset(range(num_features)))

    @classmethod
    def from_noise(cls, noise: Iterable[int], num_features: int) -> "FeaturePartition":
        noise = frozenset(int(f) for f in noise)
        if noise and (min(noise) < 0 or max(noise) >= num_features):
            raise InputError("noise feature id out of range")
        return cls(noise=noise, useful=frozenset(range(num_features)) - noise)

    @property
    def num_features(self) -> int:
        return len(self.noise) + len(self.useful)


@dataclass(frozen=True)
class ModelConfig:
    """All hyperparameters and run controls.

    ``alpha``/``beta`` may be scalars or per-feature vectors (indexed by
    feature id); ``sigma`` a scalar or per-cluster vector. The defaults of 1
    give uniform priors everywhere.
    """

    alpha: float | Sequence[float] = 1.0
    beta: float | Sequence[float] = 1.0
    gamma_useful: float = 1.0
    gamma_noise: float = 1.0
    sigma: float | Sequence[float] = 1.0
    k_range: tuple[int, int] = (3, 7)
    restarts: int = 3
    seed: int = 0
    em_max_iters: int = 50
    em_tol: int = 0
    noise_prefix_rule: str = "first-decrease"

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma_useful", "gamma_noise", "sigma"):
            value = np.asarray(getattr(self, name), dtype=np.float64)
            if np.any(value <= 0) or not np.all(np.isfinite(value)):
                raise InputError(f"hyperparameter {name} must be positive and finite")
        lo, hi = self.k_range
        if lo < 1 or hi < lo:
            raise InputError("k_range must satisfy 1 <= low <= high")
        if self.restarts < 1:
            raise InputError("restarts must be >= 1")
        if self.em_max_iters < 1:
            raise InputError("em_max_iters must be >= 1")
        if self.em_tol < 0:
            raise InputError("em_tol must be >= 0")
        if self.noise_prefix_rule not in ("first-decrease", "best-prefix"):
            raise InputError("noise_prefix_rule must be 'first-decrease' or 'best-prefix'")


@dataclass(frozen=True)
class MergeRecord:
    """One accepted merge: the two merged node ids, the id of the new node,
    the feature set chosen to be shared, and the log-ML gain in nats."""

    left: int
    right: int
    new_id: int
    noise: frozenset[int]
    delta: float


@dataclass(frozen=True)
class HierarchyNode:
    node_id: int
    children: tuple[int, ...]
    parent: Optional[int]
    local_noise: frozenset[int]
    eligible: frozenset[int]
    stats: ClusterStats
    member_docs: frozenset[int]

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass(frozen=True)
class Dendrogram:
    """Merge tree over the flat clusters, with the ordered merge trace.

    Leaves carry the flat clusters' member documents; each internal node
    carries the feature set its subtree shares (``local_noise``) and the
    set still allowed to become shared above it (``eligible``).
    """

    nodes: Mapping[int, HierarchyNode]
    root: int
    merge_trace: tuple[MergeRecord, ...]

    def leaf_ids(self) -> list[int]:
        return sorted(n.node_id for n in self.nodes.values() if n.is_leaf)

    def num_docs(self) -> int:
        return sum(len(self.nodes[i].member_docs) for i in self.leaf_ids())

    def subtree_leaves(self, node_id: int) -> list[int]:
        node = self.nodes[node_id]
        if node.is_leaf:
            return [node_id]
        out: list[int] = []
        for c in node.children:
            out.extend(self.subtree_leaves(c))
        return out

    def subtree_docs(self, node_id: int) -> frozenset[int]:
        docs: set[int] = set()
        for leaf in self.subtree_leaves(node_id):
            docs |= self.nodes[leaf].member_docs
        return frozenset(docs)

    def cumulative_noise(self, node_id: int) -> frozenset[int]:
        """Union of the shared feature sets along the root-to-node path."""
        out: set[int] = set()
        cur: Optional[int] = node_id
        while cur is not None:
            out |= self.nodes[cur].local_noise
            cur = self.nodes[cur].parent
        return frozenset(out)

    def validate(self) -> None:
        """Check tree structure and that the trace replays to this tree."""
        seen_parent: dict[int, int] = {}
        for node in self.nodes.values():
            for c in node.children:
                if c in seen_parent:
                    raise InternalError(f"node {c} has two parents")
                seen_parent[c] = node.node_id
        for node in self.nodes.values():
            expected = seen_parent.get(node.node_id)
            if node.parent != expected:
                raise InternalError(f"node {node.node_id} parent link inconsistent")
        if self.nodes[self.root].parent is not None:
            raise InternalError("root has a parent")
        non_root = [n for n in self.nodes.values() if n.node_id != self.root]
        if any(n.parent is None for n in non_root):
            raise InternalError("non-root node without a parent")

        merged_into: dict[int, int] = {}
        for rec in self.merge_trace:
            node = self.nodes.get(rec.new_id)
            if node is None or set(node.children) != {rec.left, rec.right}:
                raise InternalError("merge trace does not replay to the tree")
            if node.local_noise != rec.noise:
                raise InternalError("merge trace noise set differs from the node")
            merged_into[rec.left] = rec.new_id
            merged_into[rec.right] = rec.new_id
        internal = [n for n in self.nodes.values() if not n.is_leaf and n.node_id != self.root]
        trace_new = {rec.new_id for rec in self.merge_trace}
        for n in internal:
            if n.node_id not in trace_new:
                raise InternalError(f"internal node {n.node_id} missing from the merge trace")
