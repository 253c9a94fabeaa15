"""Text normalization shared by similarity, matching, and evaluation.

OCR'd Spanish and LLM answers disagree on case and diacritics constantly, so
every string comparison in the package goes through `fold`.
"""

from __future__ import annotations

import unicodedata

_PUNCT_TABLE = None


def fold(s: str) -> str:
    """Lowercase, strip diacritics, collapse whitespace."""
    s = unicodedata.normalize("NFD", s)
    s = "".join(c for c in s if not unicodedata.combining(c))
    return " ".join(s.casefold().split())


def tokenize(text: str) -> list[str]:
    """Whitespace tokens after folding and punctuation stripping."""
    folded = fold(text)
    cleaned = "".join(c if c.isalnum() else " " for c in folded)
    return cleaned.split()


def shingles(tokens: list[str], n: int) -> list[str]:
    """Overlapping word n-grams; empty when fewer than n tokens."""
    if n < 1:
        raise ValueError("shingle size must be >= 1")
    return [" ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def fold_set(values) -> frozenset[str]:
    """Folded, de-duplicated view of a string collection; empties dropped."""
    return frozenset(f for f in (fold(v) for v in values) if f)
