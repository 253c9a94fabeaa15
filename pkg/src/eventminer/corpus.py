"""Corpus ingestion and the OCR-failure pre-screen.

Input is a JSONL or CSV file of already-OCR'd articles. Malformed rows are
counted and skipped, never fatal: a corpus of hundreds of thousands of
scanned articles will contain damaged rows.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
from dataclasses import dataclass, field
from pathlib import Path

from eventminer.errors import ConfigError

DATE_RANGE = (dt.date(1992, 1, 1), dt.date(2022, 12, 31))


@dataclass(frozen=True)
class Article:
    """One OCR'd news article. Immutable, safe to share across threads."""

    article_id: str
    source: str
    publication_date: dt.date
    text: str
    scan_ref: str | None = None

    @property
    def date_out_of_range(self) -> bool:
        lo, hi = DATE_RANGE
        return not lo <= self.publication_date <= hi


@dataclass
class CorpusManifest:
    total_loaded: int = 0
    dropped_short: int = 0
    dropped_malformed: int = 0
    retained_ids: list[str] = field(default_factory=list)

    def check(self) -> None:
        if self.total_loaded != (
            self.dropped_short + self.dropped_malformed + len(self.retained_ids)
        ):
            raise AssertionError("manifest accounting does not reconcile")

    def as_dict(self) -> dict:
        return {
            "total_loaded": self.total_loaded,
            "dropped_short": self.dropped_short,
            "dropped_malformed": self.dropped_malformed,
            "retained_ids": list(self.retained_ids),
        }


def _article_from_row(row: dict) -> Article:
    article_id = row.get("article_id")
    text = row.get("text")
    if not article_id or text is None or not isinstance(text, str):
        raise ValueError("missing article_id or text")
    date = dt.date.fromisoformat(str(row["publication_date"]))
    scan_ref = row.get("scan_ref") or None
    return Article(
        article_id=str(article_id),
        source=str(row.get("source", "")),
        publication_date=date,
        text=text,
        scan_ref=scan_ref,
    )


def prescreen(article: Article, min_chars: int = 500) -> str:
    """'keep' or 'drop_short'; counts unicode scalar values after trimming."""
    return "keep" if len(article.text.strip()) >= min_chars else "drop_short"


def load_corpus(
    path: str | Path,
    format: str = "jsonl",
    min_chars: int = 500,
) -> tuple[list[Article], CorpusManifest]:
    """Load, validate, and pre-screen a corpus file.

    Returns the retained articles and a manifest whose counts reconcile:
    total = dropped_short + dropped_malformed + retained.
    """
    path = Path(path)
    if format == "jsonl":
        rows = _iter_jsonl(path)
    elif format == "csv":
        rows = _iter_csv(path)
    else:
        raise ConfigError(f"unknown corpus format: {format!r}")

    manifest = CorpusManifest()
    articles: list[Article] = []
    seen: set[str] = set()
    for row in rows:
        manifest.total_loaded += 1
        if row is None:
            manifest.dropped_malformed += 1
            continue
        try:
            article = _article_from_row(row)
        except (ValueError, KeyError, TypeError):
            manifest.dropped_malformed += 1
            continue
        if article.article_id in seen:
            manifest.dropped_malformed += 1
            continue
        if prescreen(article, min_chars) == "drop_short":
            manifest.dropped_short += 1
            continue
        seen.add(article.article_id)
        articles.append(article)
        manifest.retained_ids.append(article.article_id)
    manifest.check()
    return articles, manifest


def _iter_jsonl(path: Path):
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError:
                yield None
                continue
            yield row if isinstance(row, dict) else None


def _iter_csv(path: Path):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return
        for row in reader:
            yield {k: v for k, v in row.items() if v is not None}
