"""Numpy reference implementations of the numeric kernels.

These are the fallback used when the compiled extension has not been built
(or when ``HIERTAX_KERNELS=pure`` forces them). The compiled versions in
``_speedups.pyx`` must match these bit-for-bit up to floating-point
accumulation order.
"""
import numpy as np
from scipy import sparse
from scipy.special import gammaln


def log_md_core(counts, alpha):
    """Log marginal likelihood of one count block under a Dirichlet prior.

    ``counts`` and ``alpha`` are aligned 1-D float64 arrays over a single
    feature block. Returns 0.0 for an empty block.
    """
    if counts.shape[0] == 0:
        return 0.0
    a0 = alpha.sum()
    n = counts.sum()
    per_feature = gammaln(alpha + counts) - gammaln(alpha)
    return float(gammaln(a0) - gammaln(a0 + n) + per_feature.sum())


def prefix_merge_deltas(counts_a, counts_b, alpha):
    """Merge gain for every prefix of an ordered feature block.

    Entry ``p-1`` is the change in log marginal likelihood from modelling
    features ``[0..p)`` of two clusters with one shared distribution instead
    of two independent ones. The inputs are aligned 1-D float64 arrays.
    """
    ca = np.cumsum(alpha)
    ta = np.cumsum(counts_a)
    tb = np.cumsum(counts_b)
    per_feature = (
        gammaln(alpha + counts_a + counts_b)
        + gammaln(alpha)
        - gammaln(alpha + counts_a)
        - gammaln(alpha + counts_b)
    )
    header = gammaln(ca + ta) + gammaln(ca + tb) - gammaln(ca) - gammaln(ca + ta + tb)
    return header + np.cumsum(per_feature)


def doc_cluster_scores(indptr, indices, data, log_theta, log_prior):
    """Per-document, per-cluster assignment scores.

    The corpus is given as raw CSR arrays (int64 indptr/indices, float64
    data); ``log_theta`` is the dense (clusters x features) log-parameter
    matrix and ``log_prior`` the per-cluster log mixing weights.
    """
    n_docs = indptr.shape[0] - 1
    x = sparse.csr_matrix((data, indices, indptr), shape=(n_docs, log_theta.shape[1]))
    return x @ log_theta.T + log_prior
