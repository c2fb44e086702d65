"""Agglomerative merge stage over the flat clusters.

Starting from one leaf per flat cluster, repeatedly merge the pair of
active nodes whose merge most increases the log marginal likelihood, where
each candidate merge first chooses the feature subset its new subtree will
share. Stops when no merge helps; leftover nodes are attached under a
synthetic root. Everything here operates on cluster statistics only --
document rows are never read.

Two modes:

* ``fs`` (default): per pair, a greedy scan picks the shared feature
  subset; only strictly positive gains are merged.
* ``nofs``: the shared set is forced to the entire eligible set and merging
  continues to a single root on the least-bad pair, yielding a plain
  dendrogram for comparison.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from .errors import InputError
from .flat import FlatClustering
from .likelihood import hyper_values, merge_delta
from .types import ClusterStats, Dendrogram, HierarchyNode, MergeRecord, ModelConfig, add_stats, counts_vector


# Gains smaller than this (in nats) are numeric noise, never evidence.
_DELTA_TOL = 1e-9


@dataclass(frozen=True)
class MergeProposal:
    """A candidate merge of two active nodes with its chosen shared
    feature set and the resulting log-ML gain (nats)."""

    left: int
    right: int
    noise: frozenset[int]
    delta: float


@dataclass
class _BuildNode:
    """Mutable node record used while the tree is under construction."""

    node_id: int
    children: tuple[int, ...]
    local_noise: frozenset[int]
    eligible: frozenset[int]
    stats: ClusterStats
    member_docs: frozenset[int]


def eligible_noise(a: HierarchyNode, b: HierarchyNode) -> frozenset[int]:
    """Features still allowed to be shared by a merge of ``a`` and ``b``.

    A feature committed as cluster-specific by any lower merge is excluded
    for good: a leaf offers the whole global useful set, an internal node
    only the set chosen at its creating merge.
    """
    return a.eligible & b.eligible


def greedy_noise_selection(
    a: ClusterStats,
    b: ClusterStats,
    eligible: Iterable[int],
    config: ModelConfig,
) -> tuple[frozenset[int], float]:
    """Choose which eligible features the merged pair should share.

    Features are sorted by how similar their within-eligible token shares
    are in the two clusters (most similar first, ties to the lower id), and
    prefixes of that order are scored. Under ``first-decrease`` the scan
    stops as soon as adding a feature no longer improves the gain; under
    ``best-prefix`` the best-scoring prefix wins. Returns the empty set and
    0 when nothing helps.
    """
    feats = np.asarray(sorted(set(int(f) for f in eligible)), dtype=np.int64)
    if feats.size == 0:
        return frozenset(), 0.0
    alpha = hyper_values(config.alpha, feats)
    ca = counts_vector(a, feats)
    cb = counts_vector(b, feats)

    ta = ca.sum()
    tb = cb.sum()
    share_a = ca / ta if ta > 0 else np.zeros_like(ca)
    share_b = cb / tb if tb > 0 else np.zeros_like(cb)
    order = np.argsort(np.abs(share_a - share_b), kind="stable")

    deltas = _kernels.prefix_merge_deltas(ca[order], cb[order], alpha[order])

    if config.noise_prefix_rule == "first-decrease":
        # A single shared feature always gains exactly 0 (its block total is
        # fixed), so the scan walks the prefix curve until the first strict
        # drop rather than demanding an increase at every step. Drops within
        # log-gamma rounding noise of a plateau must not end the scan, hence
        # the tolerance.
        prev = 0.0
        length = 0
        for p in range(feats.size):
            if deltas[p] < prev - _DELTA_TOL:
                break
            prev = float(deltas[p])
            length = p + 1
        best = float(deltas[length - 1]) if length else 0.0
    else:  # best-prefix
        p = int(np.argmax(deltas))
        best, length = float(deltas[p]), p + 1

    if length == 0 or best <= _DELTA_TOL:
        return frozenset(), 0.0
    return frozenset(int(f) for f in feats[order[:length]]), best


def _propose(left, right, config: ModelConfig, mode: str) -> MergeProposal:
    elig = left.eligible & right.eligible
    if mode == "fs":
        noise, delta = greedy_noise_selection(left.stats, right.stats, elig, config)
    else:
        noise = frozenset(elig)
        delta = merge_delta(left.stats, right.stats, noise, config.alpha)
    return MergeProposal(left=left.node_id, right=right.node_id, noise=noise, delta=delta)


def best_merge(
    active: Sequence[HierarchyNode],
    config: ModelConfig,
    mode: str = "fs",
) -> Optional[MergeProposal]:
    """Best merge among all unordered pairs of active nodes.

    In ``fs`` mode a proposal is returned only if its gain is strictly
    positive; in ``nofs`` mode the maximal (possibly negative) gain wins.
    Ties go to the smaller left id, then the smaller right id.
    """
    if len(active) < 2:
        raise InputError("need at least two active nodes")
    if mode not in ("fs", "nofs"):
        raise InputError("mode must be 'fs' or 'nofs'")
    nodes = sorted(active, key=lambda n: n.node_id)
    best: Optional[MergeProposal] = None
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            prop = _propose(nodes[i], nodes[j], config, mode)
            if best is None or prop.delta > best.delta:
                best = prop
    if mode == "fs" and (best is None or best.delta <= 0.0):
        return None
    return best


def build_hierarchy(flat: FlatClustering, config: ModelConfig, mode: str = "fs") -> Dendrogram:
    """Merge the flat clusters bottom-up into a dendrogram.

    One leaf per flat cluster (eligible set = the global useful set). Each
    accepted merge creates a node whose statistics are the sum of the
    pair's, whose local shared set is the chosen one, and whose eligible
    set shrinks to exactly that choice. In ``fs`` mode merging stops when
    no pair gains; leftovers go under a synthetic root with an empty shared
    set. In ``nofs`` mode merging always reaches a single root.
    """
    if mode not in ("fs", "nofs"):
        raise InputError("mode must be 'fs' or 'nofs'")
    assign = np.asarray(flat.assignments, dtype=np.int64)
    useful = frozenset(flat.partition.useful)

    records: dict[int, _BuildNode] = {}
    for k in range(flat.k):
        docs = frozenset(int(i) for i in np.nonzero(assign == k)[0])
        records[k] = _BuildNode(k, (), frozenset(), useful, flat.stats[k], docs)

    active = dict(records)
    cache: dict[tuple[int, int], MergeProposal] = {}
    trace: list[MergeRecord] = []
    next_id = flat.k

    while len(active) >= 2:
        ids = sorted(active)
        best: Optional[MergeProposal] = None
        for i in range(len(ids)):
            for j in range(i + 1, len(ids)):
                key = (ids[i], ids[j])
                prop = cache.get(key)
                if prop is None:
                    prop = _propose(active[ids[i]], active[ids[j]], config, mode)
                    cache[key] = prop
                if best is None or prop.delta > best.delta:
                    best = prop
        if mode == "fs" and best.delta <= 0.0:
            break

        left = active.pop(best.left)
        right = active.pop(best.right)
        cache = {k: v for k, v in cache.items() if best.left not in k and best.right not in k}
        merged = _BuildNode(
            next_id,
            (best.left, best.right),
            best.noise,
            best.noise,
            add_stats(left.stats, right.stats),
            frozenset(),
        )
        records[next_id] = merged
        active[next_id] = merged
        trace.append(
            MergeRecord(
                left=best.left, right=best.right, new_id=next_id, noise=best.noise, delta=best.delta
            )
        )
        next_id += 1

    if len(active) == 1:
        root_id = next(iter(active))
    else:
        children = tuple(sorted(active))
        stats = records[children[0]].stats
        for c in children[1:]:
            stats = add_stats(stats, records[c].stats)
        records[next_id] = _BuildNode(next_id, children, frozenset(), frozenset(), stats, frozenset())
        root_id = next_id

    parent: dict[int, int] = {}
    for rec in records.values():
        for c in rec.children:
            parent[c] = rec.node_id
    nodes = {
        rec.node_id: HierarchyNode(
            node_id=rec.node_id,
            children=rec.children,
            parent=parent.get(rec.node_id),
            local_noise=rec.local_noise,
            eligible=rec.eligible,
            stats=rec.stats,
            member_docs=rec.member_docs,
        )
        for rec in records.values()
    }
    return Dendrogram(nodes=nodes, root=root_id, merge_trace=tuple(trace))
