# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the numeric kernels; see _pure.py for the contracts."""
from libc.math cimport lgamma

import numpy as np


def log_md_core(double[::1] counts, double[::1] alpha):
    cdef Py_ssize_t j, m = counts.shape[0]
    cdef double a0 = 0.0, n = 0.0, acc = 0.0
    if m == 0:
        return 0.0
    for j in range(m):
        a0 += alpha[j]
        n += counts[j]
        acc += lgamma(alpha[j] + counts[j]) - lgamma(alpha[j])
    return acc + lgamma(a0) - lgamma(a0 + n)


def prefix_merge_deltas(double[::1] counts_a, double[::1] counts_b, double[::1] alpha):
    cdef Py_ssize_t j, m = counts_a.shape[0]
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef double a0 = 0.0, ta = 0.0, tb = 0.0, acc = 0.0
    for j in range(m):
        a0 += alpha[j]
        ta += counts_a[j]
        tb += counts_b[j]
        acc += (lgamma(alpha[j] + counts_a[j] + counts_b[j]) + lgamma(alpha[j])
                - lgamma(alpha[j] + counts_a[j]) - lgamma(alpha[j] + counts_b[j]))
        o[j] = acc + lgamma(a0 + ta) + lgamma(a0 + tb) - lgamma(a0) - lgamma(a0 + ta + tb)
    return out


def doc_cluster_scores(long long[::1] indptr, long long[::1] indices, double[::1] data,
                       double[:, ::1] log_theta, double[::1] log_prior):
    cdef Py_ssize_t n_docs = indptr.shape[0] - 1
    cdef Py_ssize_t n_clusters = log_theta.shape[0]
    out = np.empty((n_docs, n_clusters), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, k, p
    cdef double s
    for i in range(n_docs):
        for k in range(n_clusters):
            s = log_prior[k]
            for p in range(indptr[i], indptr[i + 1]):
                s += data[p] * log_theta[k, indices[p]]
            o[i, k] = s
    return out
