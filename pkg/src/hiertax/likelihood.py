"""Closed-form marginal-likelihood scores, all in log space (nats).

The building block is the marginal likelihood of a block of token counts
under a multinomial whose parameter vector carries a Dirichlet prior and is
integrated out. Per-document multinomial coefficients are omitted
everywhere: they depend only on the fixed observed counts, so they cancel
in every model comparison this package performs. No raw gamma value is ever
formed; all arithmetic goes through log-gamma.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from . import _kernels
from .errors import InputError
from .types import (
    ClusterStats,
    Dendrogram,
    FeaturePartition,
    ModelConfig,
    combine_stats,
    counts_vector,
    project,
)


def _feat_array(feats: Iterable[int]) -> np.ndarray:
    """Sorted unique feature ids as int64; fixes summation order."""
    return np.asarray(sorted(set(int(f) for f in feats)), dtype=np.int64)


def hyper_values(hyper, feats: np.ndarray) -> np.ndarray:
    """Hyperparameter values aligned with ``feats``.

    ``hyper`` is either a positive scalar (broadcast) or a full per-feature
    vector indexed by feature id.
    """
    arr = np.asarray(hyper, dtype=np.float64)
    if arr.ndim == 0:
        out = np.full(feats.shape[0], float(arr))
    elif feats.shape[0] == 0:
        out = np.empty(0, dtype=np.float64)
    else:
        if feats.max(initial=-1) >= arr.shape[0]:
            raise InputError("hyperparameter vector shorter than the feature space")
        out = arr[feats]
    if out.size and (np.any(out <= 0) or not np.all(np.isfinite(out))):
        raise InputError("hyperparameters must be positive and finite")
    return out


def log_dirichlet_multinomial(s: ClusterStats, feats: Iterable[int], alpha=1.0) -> float:
    """Log marginal likelihood of the counts of ``s`` on the block ``feats``.

    Computed as log-gamma ratios of the block totals and per-feature counts;
    an empty block scores 0 (an empty product of distributions is 1).
    """
    feat_arr = _feat_array(feats)
    if feat_arr.size == 0:
        return 0.0
    a = hyper_values(alpha, feat_arr)
    t = counts_vector(s, feat_arr)
    return float(_kernels.log_md_core(t, a))


def block_split_log_ml(totals: Sequence[float], hypers: Sequence[float]) -> float:
    """Log marginal likelihood of count totals split across blocks.

    This is the same Dirichlet-multinomial form applied to block totals:
    it prices how the tokens divide among blocks, each block having one
    aggregate hyperparameter. Used for the useful/noise token split.
    """
    t = np.asarray(totals, dtype=np.float64)
    h = np.asarray(hypers, dtype=np.float64)
    if np.any(h <= 0):
        raise InputError("hyperparameters must be positive")
    return float(_kernels.log_md_core(t, h))


def _sigma_values(sigma, k: int) -> np.ndarray:
    arr = np.asarray(sigma, dtype=np.float64)
    if arr.ndim == 0:
        return np.full(k, float(arr))
    if arr.shape[0] != k:
        raise InputError("sigma vector length must equal the cluster count")
    return arr.astype(np.float64)


def membership_log_ml(doc_counts: Sequence[int], sigma) -> float:
    """Log marginal likelihood of the document-to-cluster membership counts."""
    d = np.asarray(doc_counts, dtype=np.float64)
    s = _sigma_values(sigma, d.shape[0])
    s0 = s.sum()
    nu = d.sum()
    return float(gammaln(s0) - gammaln(s0 + nu) + (gammaln(s + d) - gammaln(s)).sum())


def flat_log_ml(
    cluster_stats: Sequence[ClusterStats],
    partition: FeaturePartition,
    config: ModelConfig,
) -> float:
    """Log marginal likelihood of a flat clustering.

    Four additive parts: the useful/noise token-split score and the pooled
    noise-block score (both emitted only when the noise set is nonempty; an
    empty block contributes 0), the membership score over cluster sizes, and
    one per-cluster score over the useful features.
    """
    if not cluster_stats:
        raise InputError("at least one cluster is required")
    useful = _feat_array(partition.useful)
    noise = _feat_array(partition.noise)

    total = 0.0
    if noise.size:
        pooled = combine_stats(cluster_stats)
        noise_tokens = project(pooled, noise).total_tokens
        useful_tokens = pooled.total_tokens - noise_tokens
        total += block_split_log_ml(
            [useful_tokens, noise_tokens], [config.gamma_useful, config.gamma_noise]
        )
        total += log_dirichlet_multinomial(pooled, noise, config.beta)

    total += membership_log_ml([s.doc_count for s in cluster_stats], config.sigma)
    for s in cluster_stats:
        total += log_dirichlet_multinomial(s, useful, config.alpha)
    return total


def merge_delta(a: ClusterStats, b: ClusterStats, noise_feats: Iterable[int], alpha=1.0) -> float:
    """Change in log marginal likelihood from pooling two clusters' counts
    on ``noise_feats`` under one shared distribution.

    Equals the score of the pooled block minus the two separate block
    scores; depends on the clusters only through their projections onto
    ``noise_feats``. An empty set returns 0 by convention (no shared
    distribution means no change).
    """
    feat_arr = _feat_array(noise_feats)
    if feat_arr.size == 0:
        return 0.0
    al = hyper_values(alpha, feat_arr)
    ta = counts_vector(a, feat_arr)
    tb = counts_vector(b, feat_arr)
    return float(_kernels.prefix_merge_deltas(ta, tb, al)[-1])


def hierarchy_log_ml(dendro: Dendrogram, partition: FeaturePartition, config: ModelConfig) -> float:
    """Log marginal likelihood of a merge tree built over flat clusters.

    The flat score of the leaf clusters plus, for every internal node, the
    local gain of modelling the node's shared feature block with one pooled
    distribution instead of one per child. For trees produced by the merge
    stage this equals the flat score plus the sum of the trace deltas.
    """
    leaf_stats = [dendro.nodes[i].stats for i in dendro.leaf_ids()]
    total = flat_log_ml(leaf_stats, partition, config)
    for node in dendro.nodes.values():
        if node.is_leaf or not node.local_noise:
            continue
        total += log_dirichlet_multinomial(node.stats, node.local_noise, config.alpha)
        for child in node.children:
            total -= log_dirichlet_multinomial(
                dendro.nodes[child].stats, node.local_noise, config.alpha
            )
    return total
