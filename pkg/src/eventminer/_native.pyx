# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: pairwise tf-idf cosine and forest batch scoring.

`eventminer._pure` mirrors these functions operation-for-operation; both
accumulate in identical order so results are bit-identical across the two
paths. Keep them in sync.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

# idf over a two-document collection with ln((N+1)/(df+1)) + 1 smoothing:
# shared shingles have df=2, exclusive ones df=1.
cdef double IDF_SHARED = 1.0
cdef double IDF_EXCLUSIVE = 1.4054651081081644  # ln(3/2) + 1


def tfidf_cosine(cnp.int64_t[::1] ids_a, cnp.float64_t[::1] tf_a,
                 cnp.int64_t[::1] ids_b, cnp.float64_t[::1] tf_b):
    """Cosine of two tf-idf weighted shingle vectors.

    Inputs are sorted unique shingle ids with their term frequencies.
    Returns 0.0 when either side is empty.
    """
    cdef Py_ssize_t na_len = ids_a.shape[0]
    cdef Py_ssize_t nb_len = ids_b.shape[0]
    if na_len == 0 or nb_len == 0:
        return 0.0
    cdef Py_ssize_t i = 0, j = 0
    cdef double dot = 0.0, na = 0.0, nb = 0.0
    cdef double wa, wb
    while i < na_len and j < nb_len:
        if ids_a[i] < ids_b[j]:
            wa = tf_a[i] * IDF_EXCLUSIVE
            na += wa * wa
            i += 1
        elif ids_a[i] > ids_b[j]:
            wb = tf_b[j] * IDF_EXCLUSIVE
            nb += wb * wb
            j += 1
        else:
            wa = tf_a[i] * IDF_SHARED
            wb = tf_b[j] * IDF_SHARED
            dot += wa * wb
            na += wa * wa
            nb += wb * wb
            i += 1
            j += 1
    while i < na_len:
        wa = tf_a[i] * IDF_EXCLUSIVE
        na += wa * wa
        i += 1
    while j < nb_len:
        wb = tf_b[j] * IDF_EXCLUSIVE
        nb += wb * wb
        j += 1
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / sqrt(na * nb)


def forest_scores(cnp.float64_t[:, ::1] X,
                  cnp.int32_t[::1] feature, cnp.float64_t[::1] threshold,
                  cnp.int32_t[::1] left, cnp.int32_t[::1] right,
                  cnp.int32_t[::1] missing, cnp.float64_t[::1] value,
                  cnp.int32_t[::1] roots):
    """Mean leaf class fraction over all trees, one score per row of X.

    Trees are flattened into shared node arrays; `feature == -1` marks a
    leaf and `value` holds its positive-class fraction. NaN feature values
    take the `missing` branch.
    """
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t n_trees = roots.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n, dtype=np.float64)
    cdef Py_ssize_t s, t
    cdef int node
    cdef double x
    for s in range(n):
        for t in range(n_trees):
            node = roots[t]
            while feature[node] >= 0:
                x = X[s, feature[node]]
                if x != x:  # NaN
                    node = missing[node]
                elif x <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            out[s] += value[node]
    if n_trees > 0:
        for s in range(n):
            out[s] /= n_trees
    return out
