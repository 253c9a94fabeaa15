"""Independent reference implementations used only by tests.

Everything here is written against the same written contracts as the
package but shares no code paths with it: dict arithmetic instead of
vectorized kernels, normal equations instead of QR, nested loops instead
of blocking. A bug in the package and a bug here would have to coincide
to let a test pass.
"""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from itertools import combinations

import numpy as np


# ------------------------------------------------------------ text folding

def fold_oracle(s: str) -> str:
    s = unicodedata.normalize("NFD", s)
    s = "".join(ch for ch in s if not unicodedata.combining(ch))
    return " ".join(s.casefold().split())


def tokens_oracle(text: str) -> list[str]:
    folded = fold_oracle(text)
    cleaned = "".join(ch if ch.isalnum() else " " for ch in folded)
    return cleaned.split()


# ------------------------------------------------------------ tf-idf cosine

def tfidf_cosine_oracle(text_a: str, text_b: str, n: int = 2) -> float:
    """Two-document corpus: idf(t) = ln((2+1)/(df+1)) + 1, weights tf * idf,
    cosine over the union vocabulary."""
    def grams(text: str) -> Counter:
        toks = tokens_oracle(text)
        return Counter(tuple(toks[i:i + n]) for i in range(len(toks) - n + 1))

    ca, cb = grams(text_a), grams(text_b)
    if not ca or not cb:
        return 0.0
    vocab = set(ca) | set(cb)
    wa, wb = {}, {}
    for t in vocab:
        df = (t in ca) + (t in cb)
        idf = math.log(3.0 / (df + 1.0)) + 1.0
        wa[t] = ca.get(t, 0) * idf
        wb[t] = cb.get(t, 0) * idf
    dot = sum(wa[t] * wb[t] for t in vocab)
    na = math.sqrt(sum(v * v for v in wa.values()))
    nb = math.sqrt(sum(v * v for v in wb.values()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


# ------------------------------------------------------------ haversine

def haversine_oracle(lat1: float, lon1: float, lat2: float, lon2: float,
                     radius_km: float = 6371.0) -> float:
    """atan2 form (the package uses the asin form)."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlam = math.radians(lon2 - lon1)
    a = (math.sin(dphi / 2.0) ** 2
         + math.cos(p1) * math.cos(p2) * math.sin(dlam / 2.0) ** 2)
    return 2.0 * radius_km * math.atan2(math.sqrt(a), math.sqrt(1.0 - a))


# ------------------------------------------------------------ OLS

def ols_oracle(y: np.ndarray, X: np.ndarray):
    """Normal equations; returns (beta, se, sigma2)."""
    xtx = X.T @ X
    beta = np.linalg.solve(xtx, X.T @ y)
    resid = y - X @ beta
    n, p = X.shape
    sigma2 = float(resid @ resid) / (n - p)
    cov = sigma2 * np.linalg.inv(xtx)
    return beta, np.sqrt(np.diag(cov)), sigma2


# ------------------------------------------------------------ cliques

def is_clique(members, edge_set) -> bool:
    return all(((a, b) if a <= b else (b, a)) in edge_set
               for a, b in combinations(members, 2))


def maximal_cliques_oracle(nodes, edge_set) -> list[tuple]:
    """All maximal cliques by subset enumeration. Small graphs only."""
    nodes = sorted(nodes)
    cliques = []
    for r in range(len(nodes), 0, -1):
        for combo in combinations(nodes, r):
            if not is_clique(combo, edge_set):
                continue
            if any(set(combo) < set(c) for c in cliques):
                continue
            cliques.append(combo)
    return cliques


# ------------------------------------------------------------ linkage

def month_index(year: int, month: int) -> int:
    return year * 12 + (month - 1)


def linkage_oracle(ours: list[dict], refs: list[dict], party_rule: str,
                   max_km: float, month_tolerance: int = 1) -> set[tuple]:
    """Nested-loop matcher over plain dicts.

    Each `ours` dict: id, month, year, lat/lon (or None), department,
    parties (set), types (set). Each ref dict: id, month, year, lat/lon
    (or None), department, parties (set), type (str).
    """
    pairs = set()
    for o in ours:
        if o.get("year") is None:
            continue
        if o.get("lat") is None and not o.get("department"):
            continue
        mi = month_index(o["year"], o["month"])
        for r in refs:
            if abs(mi - month_index(r["year"], r["month"])) > month_tolerance:
                continue
            if r["type"] not in o["types"]:
                continue
            op, rp = o["parties"], r["parties"]
            if party_rule == "all":
                if not op or op != rp:
                    continue
            else:
                if op and rp:
                    if not op & rp:
                        continue
                elif op or rp:
                    continue
            if o.get("lat") is not None and r.get("lat") is not None:
                d = haversine_oracle(o["lat"], o["lon"], r["lat"], r["lon"])
                if d > max_km:
                    continue
            elif o.get("department") and r.get("department"):
                if fold_oracle(o["department"]) != fold_oracle(r["department"]):
                    continue
            else:
                continue
            pairs.add((o["id"], r["id"]))
    return pairs


# ------------------------------------------------------------ blocking

def window_pairs_oracle(ordinals: list[int], window_days: int) -> int:
    """O(n^2) count of index pairs within the date window."""
    count = 0
    for i, j in combinations(range(len(ordinals)), 2):
        if abs(ordinals[i] - ordinals[j]) <= window_days:
            count += 1
    return count


# ------------------------------------------------------------ AUC

def auc_oracle(scores: np.ndarray, labels: np.ndarray) -> float:
    """Probability a random positive outscores a random negative, ties 0.5."""
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = 0.0
    for p in pos:
        wins += float(np.sum(p > neg)) + 0.5 * float(np.sum(p == neg))
    return wins / (len(pos) * len(neg))
