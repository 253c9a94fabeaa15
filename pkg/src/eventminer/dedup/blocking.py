"""Candidate pair generation by date blocking.

Sorting plus a sliding window keeps the cost at O(n*w) pairs instead of the
full n^2 comparison; the index arithmetic is vectorized so six-figure record
counts stay comfortably inside the time budget.
"""

from __future__ import annotations

import datetime as dt

import numpy as np

from eventminer.parsing import ExtractionRecord


def resolve_event_date(record: ExtractionRecord) -> dt.date | None:
    """Day-precision event date for blocking and day-gap features.

    The month/year answer has no day; the publication date supplies one when
    it falls inside the stated month, else the 15th stands in. Records with
    neither answer have no date and generate no candidate pairs.
    """
    my = record.event_month_year
    pub = record.published_date
    if my is not None:
        month, year = my
        if pub is not None and (pub.year, pub.month) == (year, month):
            return pub
        try:
            return dt.date(year, month, 15)
        except ValueError:
            return pub
    return pub


def blocked_index_pairs(ordinals: np.ndarray, window_days: int,
                        ) -> tuple[np.ndarray, np.ndarray]:
    """All index pairs (i, j), i<j in date order, within the window.

    `ordinals` is an int64 array of proleptic ordinals (or any day grid).
    Returns indices into the input array, not ids.
    """
    n = ordinals.size
    if n < 2:
        return (np.empty(0, dtype=np.int64),) * 2
    order = np.argsort(ordinals, kind="stable")
    days = ordinals[order]
    ends = np.searchsorted(days, days + window_days, side="right")
    counts = ends - np.arange(n) - 1
    total = int(counts.sum())
    if total == 0:
        return (np.empty(0, dtype=np.int64),) * 2
    i_rep = np.repeat(np.arange(n, dtype=np.int64), counts)
    offsets = np.cumsum(counts) - counts
    j_rep = (np.arange(total, dtype=np.int64) - np.repeat(offsets, counts)
             + i_rep + 1)
    return order[i_rep], order[j_rep]


def generate_candidate_pairs(records: list[ExtractionRecord],
                             window_days: int = 31,
                             dates: list[dt.date | None] | None = None,
                             ) -> list[tuple[str, str]]:
    """Unordered id pairs whose event dates differ by at most the window."""
    if dates is None:
        dates = [resolve_event_date(r) for r in records]
    ids = [r.article_id for r in records]
    keep = [(i, d) for i, d in enumerate(dates) if d is not None]
    if len(keep) < 2:
        return []
    idx = np.array([i for i, _ in keep], dtype=np.int64)
    ordinals = np.array([d.toordinal() for _, d in keep], dtype=np.int64)
    ii, jj = blocked_index_pairs(ordinals, window_days)
    pairs = []
    for a, b in zip(idx[ii], idx[jj]):
        id_a, id_b = ids[a], ids[b]
        pairs.append((id_a, id_b) if id_a <= id_b else (id_b, id_a))
    pairs.sort()
    return pairs
