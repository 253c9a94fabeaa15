"""Pairwise features for the duplicate classifier.

Nineteen features per pair: two text similarities, day gap, coordinate
distance, four set/equality binaries, and eleven three-level status matches
(both_yes / both_no / mismatch) over the tri-state answers. Every feature is
symmetric in pair order. Missing encodings: similarities fall back to 0,
distance to NaN (trees route it down a dedicated branch), an unknown on
either side of a status comparison counts as mismatch.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from eventminer.dedup.similarity import (PreparedDoc, ShingleSpace,
                                         cosine_prepared, prepare_doc)
from eventminer.evaluation import violence_types
from eventminer.geocode import GeoPoint, haversine_km
from eventminer.parsing import ExtractionRecord, TriState
from eventminer.textnorm import fold, fold_set


@dataclass(frozen=True)
class DedupConfig:
    shingle_n: int = 2
    blocking_window_days: int = 31
    cutoff: float = 0.95
    forest_trees: int = 100
    seed: int = 7
    downsample_negatives: bool = True
    # max tree depth is intentionally unlimited

    def __post_init__(self):
        if not 0.0 < self.cutoff < 1.0:
            raise ValueError("cutoff must lie in (0, 1)")
        if self.shingle_n < 1:
            raise ValueError("shingle_n must be >= 1")
        if self.forest_trees < 1:
            raise ValueError("forest_trees must be >= 1")

    def digest(self) -> str:
        payload = json.dumps(self.__dict__, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ArticleView:
    """Everything dedup needs to know about one retained article."""
    record: ExtractionRecord
    text: str
    point: GeoPoint | None
    event_date: dt.date

    @property
    def article_id(self) -> str:
        return self.record.article_id


STATUS_FIELDS = [
    ("murder_status", "is_murder"),
    ("kidnapping_status", "is_kidnapping"),
    ("armed_conflict_status", "is_armed_conflict"),
    ("attack_or_injury_status", "is_attack_or_injury"),
    ("harassment_or_threats_status", "is_harassment_or_threats"),
    ("army_status", "army_combatant"),
    ("guerrilla_status", "mentions_guerrilla"),
    ("farc_status", "farc_involved"),
    ("auc_status", "auc_involved"),
    ("eln_status", "eln_involved"),
    ("epl_status", "epl_involved"),
]

STATUS_LEVELS = ("both_yes", "both_no", "mismatch")

BASE_FEATURES = [
    "article_text_sim", "summary_sim", "num_days_apart", "dist_apart_km",
    "first_location_equal", "locations_equal", "words_spanish_equal",
    "violence_equal",
] + [name for name, _ in STATUS_FIELDS]

NUMERIC_FEATURES = BASE_FEATURES[:8]

# design-matrix column order: 8 numeric + 11 x 3 one-hot = 41
DESIGN_COLUMNS = list(NUMERIC_FEATURES)
for _status, _ in STATUS_FIELDS:
    DESIGN_COLUMNS.extend(f"{_status}__{level}" for level in STATUS_LEVELS)

# which design column belongs to which Table-style base feature
COLUMN_TO_BASE = {col: (col.split("__", 1)[0] if "__" in col else col)
                  for col in DESIGN_COLUMNS}


@dataclass(frozen=True)
class PairFeatures:
    article_text_sim: float
    summary_sim: float
    num_days_apart: int
    dist_apart_km: float | None
    first_location_equal: int
    locations_equal: int
    words_spanish_equal: int
    violence_equal: int
    statuses: tuple[str, ...]  # aligned with STATUS_FIELDS, values in STATUS_LEVELS

    def __post_init__(self):
        if not (0.0 <= self.article_text_sim <= 1.0
                and 0.0 <= self.summary_sim <= 1.0):
            raise ValueError("similarities must lie in [0, 1]")
        if self.num_days_apart < 0:
            raise ValueError("num_days_apart must be non-negative")
        if len(self.statuses) != len(STATUS_FIELDS):
            raise ValueError("one status level per tri-state feature")
        if any(s not in STATUS_LEVELS for s in self.statuses):
            raise ValueError("unknown status level")

    def as_dict(self) -> dict:
        out = {
            "article_text_sim": self.article_text_sim,
            "summary_sim": self.summary_sim,
            "num_days_apart": self.num_days_apart,
            "dist_apart_km": self.dist_apart_km,
            "first_location_equal": self.first_location_equal,
            "locations_equal": self.locations_equal,
            "words_spanish_equal": self.words_spanish_equal,
            "violence_equal": self.violence_equal,
        }
        for (name, _), level in zip(STATUS_FIELDS, self.statuses):
            out[name] = level
        return out

    def to_row(self) -> np.ndarray:
        row = np.zeros(len(DESIGN_COLUMNS), dtype=np.float64)
        row[0] = self.article_text_sim
        row[1] = self.summary_sim
        row[2] = float(self.num_days_apart)
        row[3] = np.nan if self.dist_apart_km is None else self.dist_apart_km
        row[4] = float(self.first_location_equal)
        row[5] = float(self.locations_equal)
        row[6] = float(self.words_spanish_equal)
        row[7] = float(self.violence_equal)
        base = 8
        for k, level in enumerate(self.statuses):
            row[base + 3 * k + STATUS_LEVELS.index(level)] = 1.0
        return row


def tri_status(a: TriState, b: TriState) -> str:
    if a is TriState.YES and b is TriState.YES:
        return "both_yes"
    if a is TriState.NO and b is TriState.NO:
        return "both_no"
    return "mismatch"


def compute_pair_features(a: ArticleView, b: ArticleView, shingle_n: int = 2,
                          text_sim: float | None = None,
                          summary_sim: float | None = None) -> PairFeatures:
    """Features for one unordered pair.

    Batch callers precompute the two similarities from prepared docs; when
    omitted they are computed here from the raw texts.
    """
    if text_sim is None or summary_sim is None:
        space = ShingleSpace()
        if text_sim is None:
            text_sim = cosine_prepared(prepare_doc(a.text, shingle_n, space),
                                       prepare_doc(b.text, shingle_n, space))
        if summary_sim is None:
            summary_sim = cosine_prepared(
                prepare_doc(a.record.summary, shingle_n, space),
                prepare_doc(b.record.summary, shingle_n, space))

    dist = None
    if a.point is not None and b.point is not None:
        dist = haversine_km(a.point, b.point)

    loc_a, loc_b = a.record.locations, b.record.locations
    first_equal = int(bool(loc_a) and bool(loc_b)
                      and fold(loc_a[0]) == fold(loc_b[0]))
    locations_equal = int(bool(fold_set(loc_a) & fold_set(loc_b)))
    words_equal = int(bool(fold_set(a.record.violence_words)
                           & fold_set(b.record.violence_words)))
    # equality of derived violence-type sets; two records with no stated
    # type also count as equal
    violence_equal = int(violence_types(a.record) == violence_types(b.record))

    statuses = tuple(tri_status(getattr(a.record, attr), getattr(b.record, attr))
                     for _, attr in STATUS_FIELDS)
    return PairFeatures(
        article_text_sim=text_sim,
        summary_sim=summary_sim,
        num_days_apart=abs((a.event_date - b.event_date).days),
        dist_apart_km=dist,
        first_location_equal=first_equal,
        locations_equal=locations_equal,
        words_spanish_equal=words_equal,
        violence_equal=violence_equal,
        statuses=statuses,
    )


def features_matrix(features: list[PairFeatures]) -> np.ndarray:
    if not features:
        return np.empty((0, len(DESIGN_COLUMNS)), dtype=np.float64)
    return np.stack([f.to_row() for f in features])
