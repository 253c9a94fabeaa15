"""TF-IDF weighted cosine over word n-gram shingles.

The idf is computed over the two-document collection only, with the usual
smoothing ln((N+1)/(df+1)) + 1 at N=2: a shingle present in both documents
weighs 1.0, a shingle exclusive to one weighs ln(3/2) + 1. That makes the
pairwise score a pure function of the two shingle multisets, so documents
can be prepared once (ids + counts) and compared many times in the kernel.
"""

from __future__ import annotations

import numpy as np

from eventminer import kernels
from eventminer.textnorm import shingles, tokenize


class ShingleSpace:
    """Interns shingles to dense int ids so prepared docs are comparable."""

    def __init__(self):
        self._ids: dict[tuple[str, ...], int] = {}

    def intern(self, shingle: tuple[str, ...]) -> int:
        out = self._ids.get(shingle)
        if out is None:
            out = len(self._ids)
            self._ids[shingle] = out
        return out

    def __len__(self) -> int:
        return len(self._ids)


class PreparedDoc:
    """Sorted shingle ids with raw term counts, ready for the kernel."""

    __slots__ = ("ids", "counts")

    def __init__(self, ids: np.ndarray, counts: np.ndarray):
        self.ids = ids
        self.counts = counts

    @property
    def empty(self) -> bool:
        return self.ids.size == 0


def prepare_doc(text: str, n: int, space: ShingleSpace) -> PreparedDoc:
    grams = shingles(tokenize(text), n)
    if not grams:
        return PreparedDoc(np.empty(0, dtype=np.int64),
                           np.empty(0, dtype=np.float64))
    counts: dict[int, int] = {}
    for gram in grams:
        gid = space.intern(gram)
        counts[gid] = counts.get(gid, 0) + 1
    ids = np.fromiter(counts.keys(), dtype=np.int64, count=len(counts))
    tf = np.fromiter(counts.values(), dtype=np.float64, count=len(counts))
    order = np.argsort(ids, kind="stable")
    return PreparedDoc(np.ascontiguousarray(ids[order]),
                       np.ascontiguousarray(tf[order]))


def cosine_prepared(a: PreparedDoc, b: PreparedDoc) -> float:
    if a.empty or b.empty:
        return 0.0
    value = kernels.tfidf_cosine(a.ids, a.counts, b.ids, b.counts)
    # guard against float drift just past the ends of [0, 1]
    return min(1.0, max(0.0, value))


def shingle_tfidf_cosine(text_a: str, text_b: str, n: int = 2) -> float:
    """Similarity of two texts over word n-grams; 0 when either has none."""
    space = ShingleSpace()
    return cosine_prepared(prepare_doc(text_a, n, space),
                           prepare_doc(text_b, n, space))
