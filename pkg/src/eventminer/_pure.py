"""Pure-Python/numpy fallbacks for the compiled kernels.

Mirrors `eventminer._native` operation-for-operation: the merge in
`tfidf_cosine` accumulates in the same order and `forest_scores` adds tree
values per sample in the same tree order, so both paths return bit-identical
floats. Keep in sync with _native.pyx.
"""

from __future__ import annotations

import math

import numpy as np

IDF_SHARED = 1.0
IDF_EXCLUSIVE = 1.4054651081081644  # ln(3/2) + 1


def tfidf_cosine(ids_a, tf_a, ids_b, tf_b) -> float:
    a_ids = ids_a.tolist()
    b_ids = ids_b.tolist()
    if not a_ids or not b_ids:
        return 0.0
    a_tf = tf_a.tolist()
    b_tf = tf_b.tolist()
    na_len, nb_len = len(a_ids), len(b_ids)
    i = j = 0
    dot = na = nb = 0.0
    while i < na_len and j < nb_len:
        ai, bj = a_ids[i], b_ids[j]
        if ai < bj:
            wa = a_tf[i] * IDF_EXCLUSIVE
            na += wa * wa
            i += 1
        elif ai > bj:
            wb = b_tf[j] * IDF_EXCLUSIVE
            nb += wb * wb
            j += 1
        else:
            wa = a_tf[i] * IDF_SHARED
            wb = b_tf[j] * IDF_SHARED
            dot += wa * wb
            na += wa * wa
            nb += wb * wb
            i += 1
            j += 1
    while i < na_len:
        wa = a_tf[i] * IDF_EXCLUSIVE
        na += wa * wa
        i += 1
    while j < nb_len:
        wb = b_tf[j] * IDF_EXCLUSIVE
        nb += wb * wb
        j += 1
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / math.sqrt(na * nb)


def forest_scores(X, feature, threshold, left, right, missing, value, roots):
    """Vectorized tree descent; per-sample tree sums accumulate in tree order."""
    n = X.shape[0]
    out = np.zeros(n, dtype=np.float64)
    for root in roots:
        node = np.full(n, root, dtype=np.int32)
        active = feature[node] >= 0
        while np.any(active):
            idx = np.nonzero(active)[0]
            cur = node[idx]
            x = X[idx, feature[cur]]
            nxt = np.where(
                np.isnan(x),
                missing[cur],
                np.where(x <= threshold[cur], left[cur], right[cur]),
            )
            node[idx] = nxt
            active[idx] = feature[nxt] >= 0
        out += value[node]
    if len(roots) > 0:
        out /= len(roots)
    return out
