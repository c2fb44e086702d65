"""Scoring and inspection: normalized mutual information, dendrogram
cutting, and labelling nodes by their shared terms."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import InputError
from .types import Dendrogram, Lexicon


@dataclass(frozen=True)
class Labeling:
    """A categorical labelling of an item sequence; labels are 0..k-1."""

    labels: tuple[int, ...]
    k: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(int(v) for v in self.labels))
        if self.k < 1:
            raise InputError("a labeling needs at least one category")
        if self.labels and not all(0 <= v < self.k for v in self.labels):
            raise InputError("labels must lie in 0..k-1")


def _as_labels(x: Union[Labeling, Sequence[int], np.ndarray]) -> np.ndarray:
    if isinstance(x, Labeling):
        return np.asarray(x.labels, dtype=np.int64)
    return np.asarray(x, dtype=np.int64)


def nmi(a, b) -> float:
    """Normalized mutual information 2*I(a;b) / (H(a) + H(b)), natural logs.

    Both arguments label the same items positionally (``Labeling`` or plain
    sequences). 1 means perfect agreement; by convention two constant
    labelings score 1.0 and a constant against a non-constant scores 0.0.
    """
    la = _as_labels(a)
    lb = _as_labels(b)
    if la.shape[0] != lb.shape[0]:
        raise InputError("labelings cover different item sets")
    n = la.shape[0]
    if n == 0:
        raise InputError("labelings are empty")

    _, ia = np.unique(la, return_inverse=True)
    _, ib = np.unique(lb, return_inverse=True)
    ka = int(ia.max()) + 1
    kb = int(ib.max()) + 1
    table = np.zeros((ka, kb), dtype=np.float64)
    np.add.at(table, (ia, ib), 1.0)
    pa = table.sum(axis=1) / n
    pb = table.sum(axis=0) / n

    ha = float(-(pa * np.log(pa)).sum())
    hb = float(-(pb * np.log(pb)).sum())
    if ha == 0.0 and hb == 0.0:
        return 1.0
    if ha == 0.0 or hb == 0.0:
        return 0.0

    pj = table / n
    nz = pj > 0
    mi = float((pj[nz] * (np.log(pj[nz]) - np.log(np.outer(pa, pb)[nz]))).sum())
    value = 2.0 * mi / (ha + hb)
    return min(max(value, 0.0), 1.0)


def cut(d: Dendrogram, k: int) -> Labeling:
    """Labelling of the documents obtained by cutting the tree into k groups.

    Merges are undone from the top down (latest first) until exactly k
    subtrees remain; each subtree's leaf documents share one category. A
    synthetic root with c children counts as one step from 1 group to c,
    so k values strictly between 1 and c are not reachable on such trees.
    """
    leaves = d.leaf_ids()
    if not 1 <= k <= len(leaves):
        raise InputError(f"k must lie in 1..{len(leaves)}")
    groups = [d.root]
    while len(groups) < k:
        internal = [g for g in groups if not d.nodes[g].is_leaf]
        if not internal:
            break
        top = max(internal)  # node ids increase with merge order
        groups.remove(top)
        groups.extend(sorted(d.nodes[top].children))
    if len(groups) != k:
        raise InputError(
            f"k={k} is not reachable on this tree (group count jumped to {len(groups)})"
        )

    num_docs = d.num_docs()
    labels = np.full(num_docs, -1, dtype=np.int64)
    for gi, g in enumerate(sorted(groups)):
        for doc in d.subtree_docs(g):
            labels[doc] = gi
    if np.any(labels < 0):
        raise InputError("dendrogram leaves do not cover documents 0..n-1")
    return Labeling(labels=tuple(int(v) for v in labels), k=k)


def node_labels(d: Dendrogram, node_id: int, lex: Lexicon, top_n: int) -> list[str]:
    """The node's shared features as terms, heaviest (by pooled count) first.

    Ties break toward the lower feature id; at most ``top_n`` terms.
    """
    if node_id not in d.nodes:
        raise InputError(f"unknown node id {node_id}")
    node = d.nodes[node_id]
    counts = node.stats.term_counts
    ranked = sorted(node.local_noise, key=lambda f: (-counts.get(f, 0), f))
    return [lex.term_of(f) for f in ranked[:top_n]]
