"""Independent reference implementations used to verify the library.

Everything here is deliberately written as straight-line dense-array code,
separate from the package's sparse/projection/kernel machinery: numeric
quadrature for the marginal likelihood of small blocks, dense full
recomputation of flat and hierarchical scores from raw documents, brute
force subset search, and a direct entropy-based mutual information.
"""
from __future__ import annotations

import math
from itertools import combinations

import numpy as np
from scipy import integrate
from scipy.special import gammaln


def quadrature_marginal(counts, alpha):
    """Numerically integrate the block likelihood against its prior.

    Supports 1..3 features. Returns the marginal probability (not its log)
    of the given total counts, without multinomial coefficients.
    """
    counts = [float(c) for c in counts]
    alpha = [float(a) for a in alpha]
    m = len(counts)
    if m == 1:
        return 1.0
    log_norm = gammaln(sum(alpha)) - sum(gammaln(a) for a in alpha)
    norm = math.exp(log_norm)
    if m == 2:
        t1, t2 = counts
        a1, a2 = alpha

        def f(x):
            return norm * x ** (t1 + a1 - 1) * (1 - x) ** (t2 + a2 - 1)

        value, _ = integrate.quad(f, 0.0, 1.0, epsabs=1e-13, epsrel=1e-11)
        return value
    if m == 3:
        t1, t2, t3 = counts
        a1, a2, a3 = alpha

        def f(y, x):  # x = theta_1, y = theta_2
            rest = 1.0 - x - y
            if rest <= 0.0:
                return 0.0
            return norm * x ** (t1 + a1 - 1) * y ** (t2 + a2 - 1) * rest ** (t3 + a3 - 1)

        value, _ = integrate.dblquad(
            f, 0.0, 1.0, 0.0, lambda x: 1.0 - x, epsabs=1e-12, epsrel=1e-10
        )
        return value
    raise ValueError("quadrature oracle supports at most 3 features")


def dense_log_md(counts, alpha):
    """Block marginal likelihood from dense aligned arrays, via log-gamma."""
    counts = np.asarray(counts, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    if counts.size == 0:
        return 0.0
    a0 = float(alpha.sum())
    n = float(counts.sum())
    return float(gammaln(a0) - gammaln(a0 + n) + np.sum(gammaln(alpha + counts) - gammaln(alpha)))


def dense_flat_score(cluster_counts, doc_counts, noise_mask, alpha=1.0, beta=1.0,
                     gamma_useful=1.0, gamma_noise=1.0, sigma=1.0):
    """Flat-clustering score recomputed from a dense counts matrix.

    ``cluster_counts`` is (clusters x features); ``noise_mask`` a boolean
    per-feature vector; scalar hyperparameters only.
    """
    cc = np.asarray(cluster_counts, dtype=np.float64)
    k, m = cc.shape
    noise_mask = np.asarray(noise_mask, dtype=bool)
    useful_mask = ~noise_mask
    alpha_vec = np.full(m, float(alpha))
    beta_vec = np.full(m, float(beta))

    total = 0.0
    if noise_mask.any():
        pooled = cc.sum(axis=0)
        t_noise = float(pooled[noise_mask].sum())
        t_useful = float(pooled[useful_mask].sum())
        total += dense_log_md([t_useful, t_noise], [gamma_useful, gamma_noise])
        total += dense_log_md(pooled[noise_mask], beta_vec[noise_mask])

    d = np.asarray(doc_counts, dtype=np.float64)
    s = np.full(k, float(sigma))
    total += float(gammaln(s.sum()) - gammaln(s.sum() + d.sum()))
    total += float(np.sum(gammaln(s + d) - gammaln(s)))

    for c in range(k):
        total += dense_log_md(cc[c][useful_mask], alpha_vec[useful_mask])
    return total


def dense_hierarchy_score(doc_term, leaf_assign, tree_nodes, root, noise_mask, **hypers):
    """Hierarchy score fully recomputed from raw documents.

    ``doc_term`` is the dense (docs x features) matrix, ``leaf_assign`` maps
    documents to leaf indices, ``tree_nodes`` maps node id to a dict with
    ``children`` (list) and ``noise`` (feature-id set; empty for leaves).
    Leaf node ids must equal the leaf indices used in ``leaf_assign``.

    Every node's pooled counts are re-accumulated from the documents;
    nothing is shared with the library's sufficient-statistics types.
    """
    doc_term = np.asarray(doc_term, dtype=np.float64)
    leaf_assign = np.asarray(leaf_assign)
    leaves = sorted(nid for nid, n in tree_nodes.items() if not n["children"])
    alpha = float(hypers.get("alpha", 1.0))
    m = doc_term.shape[1]
    alpha_vec = np.full(m, alpha)

    def subtree_leaves(nid):
        node = tree_nodes[nid]
        if not node["children"]:
            return [nid]
        out = []
        for c in node["children"]:
            out.extend(subtree_leaves(c))
        return out

    def pooled_counts(nid):
        members = np.isin(leaf_assign, subtree_leaves(nid))
        return doc_term[members].sum(axis=0)

    cluster_counts = np.stack([pooled_counts(leaf) for leaf in leaves])
    doc_counts = np.array([(leaf_assign == leaf).sum() for leaf in leaves], dtype=float)
    total = dense_flat_score(cluster_counts, doc_counts, noise_mask, **hypers)

    for nid, node in tree_nodes.items():
        feats = sorted(node["noise"])
        if not node["children"] or not feats:
            continue
        idx = np.asarray(feats, dtype=np.int64)
        total += dense_log_md(pooled_counts(nid)[idx], alpha_vec[idx])
        for c in node["children"]:
            total -= dense_log_md(pooled_counts(c)[idx], alpha_vec[idx])
    return total


def exhaustive_best_subset(counts_a, counts_b, alpha=1.0):
    """Best shared-feature subset by brute force over all subsets.

    Returns (best_delta, best_subset) where the empty set scores 0.
    ``counts_a``/``counts_b`` are dense vectors over the eligible features.
    """
    counts_a = np.asarray(counts_a, dtype=np.float64)
    counts_b = np.asarray(counts_b, dtype=np.float64)
    m = counts_a.shape[0]
    alpha_vec = np.full(m, float(alpha))
    best_delta, best_subset = 0.0, frozenset()
    for size in range(1, m + 1):
        for subset in combinations(range(m), size):
            idx = np.asarray(subset, dtype=np.int64)
            a, b, al = counts_a[idx], counts_b[idx], alpha_vec[idx]
            delta = (
                dense_log_md(a + b, al) - dense_log_md(a, al) - dense_log_md(b, al)
            )
            if delta > best_delta:
                best_delta, best_subset = delta, frozenset(subset)
    return best_delta, best_subset


def nmi_direct(a, b):
    """Normalized mutual information computed with plain dict counting."""
    a = list(a)
    b = list(b)
    n = len(a)
    joint: dict[tuple, int] = {}
    ca: dict[object, int] = {}
    cb: dict[object, int] = {}
    for x, y in zip(a, b):
        joint[(x, y)] = joint.get((x, y), 0) + 1
        ca[x] = ca.get(x, 0) + 1
        cb[y] = cb.get(y, 0) + 1
    ha = -sum((c / n) * math.log(c / n) for c in ca.values())
    hb = -sum((c / n) * math.log(c / n) for c in cb.values())
    if ha == 0.0 and hb == 0.0:
        return 1.0
    if ha == 0.0 or hb == 0.0:
        return 0.0
    mi = 0.0
    for (x, y), c in joint.items():
        p = c / n
        mi += p * math.log(p / ((ca[x] / n) * (cb[y] / n)))
    return 2.0 * mi / (ha + hb)


def random_cluster_counts(rng, clusters, features, scale=40):
    """Random small integer count matrix with a few structural zeros."""
    mat = rng.poisson(rng.uniform(0.2, scale / features, size=(clusters, features)) * scale)
    mat[rng.random(mat.shape) < 0.25] = 0
    return mat.astype(np.int64)
