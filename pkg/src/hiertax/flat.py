"""Flat clustering stage: hard-assignment EM over a multinomial mixture,
multi-restart, with the number of clusters chosen by marginal likelihood.

Each (cluster count, restart) run is independent and deterministic given
its derived seed; the selection over runs is a deterministic reduction, so
running them in any order (or in parallel) yields the same result.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InputError
from .likelihood import flat_log_ml, hyper_values, _feat_array
from .types import (
    ClusterStats,
    FeaturePartition,
    ModelConfig,
    SparseDocMatrix,
    stats_from_assignment,
)


@dataclass(frozen=True)
class FlatClustering:
    """A hard partition of the corpus with its sufficient statistics.

    ``k`` is the effective cluster count after empty clusters were dropped;
    ``score`` is the flat log marginal likelihood under the producing
    configuration.
    """

    k: int
    assignments: tuple[int, ...]
    stats: tuple[ClusterStats, ...]
    partition: FeaturePartition
    score: float


def _count_matrix(stats_list, num_features: int) -> np.ndarray:
    mat = np.zeros((len(stats_list), num_features), dtype=np.float64)
    for k, s in enumerate(stats_list):
        for fid, c in s.term_counts.items():
            mat[k, fid] = c
    return mat


def _estep_params(counts_mat, doc_counts, useful, config):
    """Smoothed log parameters and log mixing weights for the E-step.

    Parameters are posterior means, so unseen terms never produce log 0.
    Features outside the useful set get log-parameter 0 in every cluster:
    their contribution is then identical across clusters and cannot affect
    the argmax.
    """
    k, m = counts_mat.shape
    alpha = hyper_values(config.alpha, useful)
    a0 = alpha.sum()
    useful_tokens = counts_mat[:, useful].sum(axis=1)

    log_theta = np.zeros((k, m), dtype=np.float64)
    log_theta[:, useful] = np.log(counts_mat[:, useful] + alpha) - np.log(
        useful_tokens + a0
    )[:, None]

    sigma = np.asarray(config.sigma, dtype=np.float64)
    sigma = np.full(k, float(sigma)) if sigma.ndim == 0 else sigma
    nu = doc_counts.sum()
    log_prior = np.log(doc_counts + sigma) - np.log(nu + sigma.sum())
    return np.ascontiguousarray(log_theta), log_prior


def _assign_docs(data: SparseDocMatrix, log_theta, log_prior) -> np.ndarray:
    indptr, indices, values = data.csr_arrays
    scores = _kernels.doc_cluster_scores(indptr, indices, values, log_theta, log_prior)
    return np.argmax(scores, axis=1).astype(np.int64)


def _aggregate(data: SparseDocMatrix, assign: np.ndarray, k: int):
    """Dense (clusters x features) count matrix and per-cluster doc counts."""
    indptr, indices, values = data.csr_arrays
    mat = np.zeros((k, data.num_features), dtype=np.float64)
    row_of = np.repeat(np.arange(data.num_docs), np.diff(indptr))
    np.add.at(mat, (assign[row_of], indices), values)
    doc_counts = np.bincount(assign, minlength=k).astype(np.float64)
    return mat, doc_counts


def init_assignments(data: SparseDocMatrix, k: int, seed) -> np.ndarray:
    """Initial hard assignment from k randomly seeded document centroids.

    k distinct documents are drawn, each seeding one cluster; all documents
    are then assigned by a single scoring pass against those singleton
    clusters, and every seed document is pinned to its own cluster so no
    cluster starts empty. Deterministic given the seed.
    """
    nu = data.num_docs
    if k < 1 or k > nu:
        raise InputError(f"cluster count {k} out of range 1..{nu}")
    rng = np.random.default_rng(seed)
    seeds = rng.choice(nu, size=k, replace=False)

    config = ModelConfig()  # uniform-prior smoothing for the seeding pass
    useful = np.arange(data.num_features, dtype=np.int64)
    mat = np.zeros((k, data.num_features), dtype=np.float64)
    for c, doc in enumerate(seeds):
        for fid, count in data.rows[doc].items():
            mat[c, fid] = count
    doc_counts = np.ones(k, dtype=np.float64)
    log_theta, log_prior = _estep_params(mat, doc_counts, useful, config)
    assign = _assign_docs(data, log_theta, log_prior)
    assign[seeds] = np.arange(k)
    return assign


def _drop_empty(assign: np.ndarray, k: int) -> tuple[np.ndarray, int]:
    """Renumber cluster ids so only non-empty clusters remain, preserving
    order. Membership of the surviving documents is unchanged."""
    present = np.unique(assign)
    remap = np.full(k, -1, dtype=np.int64)
    remap[present] = np.arange(present.shape[0])
    return remap[assign], int(present.shape[0])


def em_run(
    data: SparseDocMatrix,
    k: int,
    partition: FeaturePartition,
    config: ModelConfig,
    seed,
) -> FlatClustering:
    """One hard-EM run from a seeded initialization.

    Alternates assignment (each document to its best-scoring cluster under
    smoothed parameters over the useful features plus the log mixing
    weight) with recomputing cluster statistics, until assignments stop
    changing (within ``em_tol``) or ``em_max_iters`` passes. Empty clusters
    are dropped at the end, so the returned cluster count may be smaller
    than requested.
    """
    useful = _feat_array(partition.useful)
    if useful.size == 0:
        raise InputError("the useful feature set is empty")
    assign = init_assignments(data, k, seed)

    for _ in range(config.em_max_iters):
        mat, doc_counts = _aggregate(data, assign, k)
        log_theta, log_prior = _estep_params(mat, doc_counts, useful, config)
        new_assign = _assign_docs(data, log_theta, log_prior)
        changed = int(np.count_nonzero(new_assign != assign))
        assign = new_assign
        if changed <= config.em_tol:
            break

    assign, k_eff = _drop_empty(assign, k)
    stats = stats_from_assignment(data, assign, k_eff)
    score = flat_log_ml(stats, partition, config)
    return FlatClustering(
        k=k_eff,
        assignments=tuple(int(a) for a in assign),
        stats=tuple(stats),
        partition=partition,
        score=score,
    )


def run_seed(base_seed: int, k: int, restart: int) -> tuple[int, int, int]:
    """Derived seed for one (cluster count, restart) run."""
    return (base_seed, k, restart)


def select_k(
    data: SparseDocMatrix,
    partition: FeaturePartition,
    config: ModelConfig,
) -> FlatClustering:
    """Best clustering over the configured cluster-count range and restarts.

    Every candidate count is run from ``restarts`` seeds; the clustering
    with the highest flat log marginal likelihood wins. Ties go to the
    smaller requested count, then the smaller restart index.
    """
    lo, hi = config.k_range
    if hi > data.num_docs:
        raise InputError(
            f"k_range upper bound {hi} exceeds the document count {data.num_docs}"
        )
    best: FlatClustering | None = None
    for k in range(lo, hi + 1):
        for r in range(config.restarts):
            result = em_run(data, k, partition, config, run_seed(config.seed, k, r))
            if best is None or result.score > best.score:
                best = result
    assert best is not None
    return best


def root_noise_search(
    data: SparseDocMatrix,
    clustering: FlatClustering,
    config: ModelConfig,
) -> FeaturePartition:
    """Greedy search for a corpus-wide shared feature set.

    Features are ranked by how far their smoothed per-cluster frequency
    strays from the corpus-wide frequency (most cluster-independent first);
    prefixes of that ranking are scored as the shared set and the best
    scoring prefix wins. Off by default in the pipeline.
    """
    m = data.num_features
    stats = list(clustering.stats)
    all_feats = np.arange(m, dtype=np.int64)
    alpha = hyper_values(config.alpha, all_feats)
    a0 = alpha.sum()

    counts_mat = _count_matrix(stats, m)
    totals = counts_mat.sum(axis=1, keepdims=True)
    theta = (counts_mat + alpha) / (totals + a0)
    pooled = counts_mat.sum(axis=0)
    theta_global = (pooled + alpha) / (pooled.sum() + a0)
    spread = np.abs(theta - theta_global).max(axis=0)
    order = np.argsort(spread, kind="stable")

    best_partition = FeaturePartition.all_useful(m)
    best_score = flat_log_ml(stats, best_partition, config)
    for p in range(1, m + 1):
        candidate = FeaturePartition.from_noise(order[:p].tolist(), m)
        score = flat_log_ml(stats, candidate, config)
        if score > best_score:
            best_partition, best_score = candidate, score
    return best_partition
