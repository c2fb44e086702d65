"""Synthetic corpora drawn from hierarchies of multinomial clusters.

A tree shape is a nested structure: a list/tuple is an internal node, an
integer ``n`` places ``n`` leaves directly under the parent. The two
benchmark shapes:

* ``STRUCTURE_1``: a root with two internal children of two leaves each
  (four leaves, two internal nodes below the root).
* ``STRUCTURE_2``: a root with a two-leaf internal child and an internal
  child holding a two-leaf internal node plus a bare leaf (five leaves,
  three internal nodes below the root).

Every internal node below the root owns a disjoint feature block whose
distribution and mass are drawn once and shared exactly by all leaves
beneath it; the remaining features get leaf-specific distributions.
Documents attach to leaves only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InputError
from .types import SparseDocMatrix

STRUCTURE_1 = ((2,), (2,))
STRUCTURE_2 = ((2,), ((2,), 1))


@dataclass
class _TreeInfo:
    """Flattened shape.

    Leaves are numbered 0..L-1 left to right; internal nodes below the root
    are numbered 0..I-1 in preorder. ``leaf_paths[leaf]`` lists the internal
    ids on the root-to-leaf path, topmost first.
    """

    num_leaves: int = 0
    num_internal: int = 0
    leaf_paths: list[list[int]] = field(default_factory=list)


def _walk_shape(shape) -> _TreeInfo:
    info = _TreeInfo()

    def walk(node, path: list[int]) -> None:
        if isinstance(node, (bool,)) or not isinstance(node, (int, list, tuple)):
            raise InputError("shape nodes must be ints or sequences")
        if isinstance(node, int):
            if node < 1:
                raise InputError("leaf counts in the shape must be >= 1")
            for _ in range(node):
                info.leaf_paths.append(list(path))
                info.num_leaves += 1
            return
        if len(node) == 0:
            raise InputError("internal shape nodes must be non-empty")
        nid = info.num_internal
        info.num_internal += 1
        for child in node:
            walk(child, path + [nid])

    if not isinstance(shape, (list, tuple)) or len(shape) == 0:
        raise InputError("the shape root must be a non-empty sequence")
    for child in shape:  # the root itself gets no feature block
        walk(child, [])
    return info


@dataclass(frozen=True)
class StructureSpec:
    """Generator parameters for one synthetic hierarchy.

    ``noise_alloc`` gives the feature-block size of each internal node
    below the root, in preorder; empty means no shared blocks anywhere
    (a plain flat mixture).
    """

    shape: tuple = STRUCTURE_1
    feature_count: int = 50
    noise_alloc: tuple[int, ...] = ()
    min_useful_mass: float = 0.5
    docs_per_leaf: int = 500
    tokens_per_doc: int | tuple = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.min_useful_mass <= 1.0:
            raise InputError("min_useful_mass must lie in (0, 1]")
        if self.feature_count < 1 or self.docs_per_leaf < 0:
            raise InputError("feature_count must be >= 1 and docs_per_leaf >= 0")


@dataclass
class GroundTruth:
    """Generating parameters and, after sampling, the per-document labels.

    ``leaf_params`` rows are the full leaf multinomials (each sums to 1);
    ``block_dists`` holds each internal node's within-block conditional
    distribution (sums to 1 over its block) and ``block_mass`` the total
    probability its subtree spends on that block.
    """

    leaf_params: np.ndarray
    noise_sets: dict[int, frozenset[int]]
    block_dists: dict[int, np.ndarray]
    block_mass: dict[int, float]
    leaf_labels: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    level_labels: dict[int, np.ndarray] = field(default_factory=dict)
    tree: Optional[_TreeInfo] = None

    @property
    def num_leaves(self) -> int:
        return self.leaf_params.shape[0]


def gen_params(spec: StructureSpec) -> GroundTruth:
    """Draw the hierarchy's generating parameters (no documents yet).

    Each internal node below the root gets a feature block (disjoint from
    all others) with one shared within-block distribution and one shared
    block mass; every leaf's remaining features get a leaf-specific
    distribution. Block masses are rescaled so the most constrained leaf
    keeps exactly ``min_useful_mass`` on its non-ancestor features, hence
    every leaf keeps at least that much. Deterministic given the seed.
    """
    tree = _walk_shape(spec.shape)
    m = spec.feature_count
    alloc = tuple(spec.noise_alloc) if spec.noise_alloc else (0,) * tree.num_internal
    if len(alloc) != tree.num_internal:
        raise InputError(
            f"noise_alloc has {len(alloc)} entries but the shape has "
            f"{tree.num_internal} internal nodes"
        )
    if any(a < 0 for a in alloc):
        raise InputError("noise_alloc entries must be >= 0")
    if sum(alloc) > m:
        raise InputError("noise blocks exhaust the feature space")
    for leaf, path in enumerate(tree.leaf_paths):
        if m - sum(alloc[a] for a in path) < 1:
            raise InputError(f"leaf {leaf} would retain no leaf-specific feature")

    rng = np.random.default_rng(spec.seed)
    perm = rng.permutation(m)
    noise_sets: dict[int, frozenset[int]] = {}
    pos = 0
    for nid in range(tree.num_internal):
        noise_sets[nid] = frozenset(int(f) for f in perm[pos : pos + alloc[nid]])
        pos += alloc[nid]

    block_dists: dict[int, np.ndarray] = {}
    raw_mass: dict[int, float] = {}
    for nid in range(tree.num_internal):
        size = alloc[nid]
        block_dists[nid] = rng.dirichlet(np.ones(size)) if size else np.empty(0)
        raw_mass[nid] = float(rng.uniform(0.1, 0.9)) if size else 0.0

    path_sums = [sum(raw_mass[a] for a in path) for path in tree.leaf_paths]
    max_path = max(path_sums, default=0.0)
    scale = (1.0 - spec.min_useful_mass) / max_path if max_path > 0 else 0.0
    block_mass = {nid: raw_mass[nid] * scale for nid in range(tree.num_internal)}

    leaf_params = np.zeros((tree.num_leaves, m))
    for leaf, path in enumerate(tree.leaf_paths):
        blocked: set[int] = set()
        for a in path:
            feats = sorted(noise_sets[a])
            leaf_params[leaf, feats] = block_mass[a] * block_dists[a]
            blocked |= set(feats)
        own = np.asarray(sorted(set(range(m)) - blocked), dtype=np.int64)
        mass = 1.0 - sum(block_mass[a] for a in path)
        leaf_params[leaf, own] = mass * rng.dirichlet(np.ones(own.size))

    return GroundTruth(
        leaf_params=leaf_params,
        noise_sets=noise_sets,
        block_dists=block_dists,
        block_mass=block_mass,
        tree=tree,
    )


def _level_labels(tree: _TreeInfo, leaf_labels: np.ndarray) -> dict[int, np.ndarray]:
    """Per-document labels for every internal level of the tree.

    At level d, a document is labelled by the depth-d node on its leaf's
    root path (the leaf itself when it sits above that depth). Categories
    are coded densely in first-seen order.
    """
    out: dict[int, np.ndarray] = {}
    max_len = max((len(p) for p in tree.leaf_paths), default=0)
    for level in range(1, max_len + 1):
        keys = []
        for leaf, path in enumerate(tree.leaf_paths):
            keys.append(("node", path[level - 1]) if len(path) >= level else ("leaf", leaf))
        codes = {key: i for i, key in enumerate(dict.fromkeys(keys))}
        per_leaf = np.asarray([codes[k] for k in keys], dtype=np.int64)
        out[level] = per_leaf[leaf_labels]
    return out


def sample(gt: GroundTruth, spec: StructureSpec) -> tuple[SparseDocMatrix, GroundTruth]:
    """Draw the corpus: ``docs_per_leaf`` documents from every leaf.

    Documents are emitted leaf by leaf. Per-leaf seeds are derived
    independently from the structure seed, so output is reproducible and
    does not depend on scheduling if leaves are sampled concurrently.
    """
    tree = gt.tree
    if tree is None:
        raise InputError("ground truth was not produced by gen_params")
    rows: list[dict[int, int]] = []
    leaf_labels: list[int] = []
    for leaf in range(tree.num_leaves):
        rng = np.random.default_rng((spec.seed, 1, leaf))
        theta = gt.leaf_params[leaf]
        theta = theta / theta.sum()
        for _ in range(spec.docs_per_leaf):
            if isinstance(spec.tokens_per_doc, int):
                n = spec.tokens_per_doc
            else:
                kind, mean = spec.tokens_per_doc
                if kind != "poisson":
                    raise InputError("tokens_per_doc must be an int or ('poisson', mean)")
                n = int(rng.poisson(mean))
            draw = rng.multinomial(n, theta)
            rows.append({int(f): int(draw[f]) for f in np.nonzero(draw)[0]})
            leaf_labels.append(leaf)

    data = SparseDocMatrix.from_rows(rows, spec.feature_count)
    labels = np.asarray(leaf_labels, dtype=np.int64)
    return data, GroundTruth(
        leaf_params=gt.leaf_params,
        noise_sets=gt.noise_sets,
        block_dists=gt.block_dists,
        block_mass=gt.block_mass,
        leaf_labels=labels,
        level_labels=_level_labels(tree, labels),
        tree=tree,
    )
