"""Extraction quality scoring against hand-labeled gold answers.

Six fields are scored, each with its own match rule. Accuracy is exact
matches over labeled cases; a field with no labels is undefined rather
than 0 or 1.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from eventminer.errors import ConsistencyError
from eventminer.parsing import ExtractionRecord, TriState
from eventminer.textnorm import fold, fold_set

VIOLENCE_FLAGS = (
    ("murder", "is_murder"),
    ("attack_or_injury", "is_attack_or_injury"),
    ("kidnapping", "is_kidnapping"),
    ("armed_conflict", "is_armed_conflict"),
    ("harassment_or_threats", "is_harassment_or_threats"),
)

EVAL_FIELDS = ("victim_count", "location", "attacker_group", "victim_type",
               "violence_type", "any_violence")


@dataclass(frozen=True)
class GoldLabel:
    article_id: str
    field: str
    value: str  # "-1" or "" means the gold answer is missing


def load_labels_csv(path: str | Path) -> list[GoldLabel]:
    labels = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            labels.append(GoldLabel(row["article_id"].strip(),
                                    row["field"].strip(),
                                    (row.get("value") or "").strip()))
    return labels


def violence_types(record: ExtractionRecord) -> set[str]:
    return {name for name, attr in VIOLENCE_FLAGS
            if getattr(record, attr) is TriState.YES}


def _gold_missing(value: str) -> bool:
    return value.strip() in ("", "-1")


def _matches(record: ExtractionRecord, label: GoldLabel) -> bool:
    value = label.value
    if label.field == "victim_count":
        if _gold_missing(value):
            return record.victim_count is None
        try:
            return record.victim_count == int(value)
        except ValueError:
            return False
    if label.field == "location":
        if _gold_missing(value):
            return not record.locations
        return bool(record.locations) and fold(record.locations[0]) == fold(value)
    if label.field == "attacker_group":
        gold = () if _gold_missing(value) else tuple(value.split(","))
        return fold_set(record.attackers) == fold_set(gold)
    if label.field == "victim_type":
        gold = () if _gold_missing(value) else tuple(value.split(","))
        return fold_set(record.victim_types) == fold_set(gold)
    if label.field == "violence_type":
        gold = () if _gold_missing(value) else tuple(value.split(","))
        return fold_set(violence_types(record)) == fold_set(gold)
    if label.field == "any_violence":
        actual = "yes" if violence_types(record) else "no"
        return fold(value) == actual
    raise ConsistencyError(f"unknown evaluation field {label.field!r}")


def evaluate_extraction(records: list[ExtractionRecord],
                        labels: list[GoldLabel]) -> dict[str, dict]:
    """Score records against gold labels, per field.

    Returns {field: {labeled, correct, accuracy}} where accuracy is None
    (undefined) when a field has no labels.
    """
    by_id = {r.article_id: r for r in records}
    tally = {f: {"labeled": 0, "correct": 0} for f in EVAL_FIELDS}
    for label in labels:
        if label.field not in tally:
            raise ConsistencyError(f"unknown evaluation field {label.field!r}")
        record = by_id.get(label.article_id)
        if record is None:
            raise ConsistencyError(
                f"gold label references unknown article {label.article_id!r}")
        tally[label.field]["labeled"] += 1
        if _matches(record, label):
            tally[label.field]["correct"] += 1
    out: dict[str, dict] = {}
    for fname, counts in tally.items():
        n, k = counts["labeled"], counts["correct"]
        out[fname] = {"labeled": n, "correct": k,
                      "accuracy": (k / n) if n else None}
    return out
