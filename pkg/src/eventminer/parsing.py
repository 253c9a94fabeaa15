"""Parsing of semicolon-delimited answer responses into extraction records.

The response grammar is 32 labeled answers (A..Z, AA..AF) separated by
semicolons, then a free-text summary after the final answer. Real model
output drops labels, reorders answers, and truncates, so the parser prefers
explicit "X:" labels and falls back to position for unlabeled segments.
Per-field damage degrades to a missing field with a diagnostic; only a
response with zero recoverable labels is a parse failure.
"""

from __future__ import annotations

import datetime as dt
import enum
import re
from dataclasses import dataclass, field, fields as dc_fields

from eventminer.errors import ParseFailure
from eventminer.textnorm import fold


class TriState(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


# kinds: tri, count, str, list, monthyear, date
FIELD_SPECS: list[tuple[str, str, str]] = [
    ("A", "is_single_incident", "tri"),
    ("B", "violence_words", "list"),
    ("C", "victim_count", "count"),
    ("D", "attacker_gender", "str"),
    ("E", "victim_gender", "str"),
    ("F", "is_murder", "tri"),
    ("G", "is_attack_or_injury", "tri"),
    ("H", "is_kidnapping", "tri"),
    ("I", "is_armed_conflict", "tri"),
    ("J", "is_harassment_or_threats", "tri"),
    ("K", "child_victim_count", "count"),
    ("L", "witness_words", "list"),
    ("M", "locations", "list"),
    ("N", "attackers", "list"),
    ("O", "victim_types", "list"),
    ("P", "event_month_year", "monthyear"),
    ("Q", "corpse_count", "count"),
    ("R", "army_combatant", "tri"),
    ("S", "mentions_guerrilla", "tri"),
    ("T", "farc_involved", "tri"),
    ("U", "auc_involved", "tri"),
    ("V", "eln_involved", "tri"),
    ("W", "published_date", "date"),
    ("X", "tone", "str"),
    ("Y", "front_or_commission", "str"),
    ("Z", "bloc_or_narcoparamilitary", "str"),
    ("AA", "epl_involved", "tri"),
    ("AB", "group_names", "list"),
    ("AC", "civilians_killed_by_army", "count"),
    ("AD", "falsos_positivos_count", "count"),
    ("AE", "attacker_name", "str"),
    ("AF", "criminal_group_name", "str"),
]

LABELS = [label for label, _, _ in FIELD_SPECS]
LABEL_INDEX = {label: i for i, label in enumerate(LABELS)}
_FIELD_BY_LABEL = {label: (name, kind) for label, name, kind in FIELD_SPECS}

MONTHS_EN = [
    "january", "february", "march", "april", "may", "june",
    "july", "august", "september", "october", "november", "december",
]
MONTHS_ES = [
    "enero", "febrero", "marzo", "abril", "mayo", "junio",
    "julio", "agosto", "septiembre", "octubre", "noviembre", "diciembre",
]
_MONTH_LOOKUP = {name: i + 1 for i, name in enumerate(MONTHS_EN)}
_MONTH_LOOKUP.update({name: i + 1 for i, name in enumerate(MONTHS_ES)})
_MONTH_TITLE = [m.title() for m in MONTHS_EN]


@dataclass(frozen=True)
class ExtractionRecord:
    """Parsed answers for one article. Missing is explicit: None, (), UNKNOWN."""

    article_id: str = ""
    is_single_incident: TriState = TriState.UNKNOWN
    violence_words: tuple[str, ...] = ()
    victim_count: int | None = None
    attacker_gender: str | None = None
    victim_gender: str | None = None
    is_murder: TriState = TriState.UNKNOWN
    is_attack_or_injury: TriState = TriState.UNKNOWN
    is_kidnapping: TriState = TriState.UNKNOWN
    is_armed_conflict: TriState = TriState.UNKNOWN
    is_harassment_or_threats: TriState = TriState.UNKNOWN
    child_victim_count: int | None = None
    witness_words: tuple[str, ...] = ()
    locations: tuple[str, ...] = ()
    attackers: tuple[str, ...] = ()
    victim_types: tuple[str, ...] = ()
    event_month_year: tuple[int, int] | None = None  # (month, year)
    corpse_count: int | None = None
    army_combatant: TriState = TriState.UNKNOWN
    mentions_guerrilla: TriState = TriState.UNKNOWN
    farc_involved: TriState = TriState.UNKNOWN
    auc_involved: TriState = TriState.UNKNOWN
    eln_involved: TriState = TriState.UNKNOWN
    published_date: dt.date | None = None
    tone: str | None = None
    front_or_commission: str | None = None
    bloc_or_narcoparamilitary: str | None = None
    epl_involved: TriState = TriState.UNKNOWN
    group_names: tuple[str, ...] = ()
    civilians_killed_by_army: int | None = None
    falsos_positivos_count: int | None = None
    attacker_name: str | None = None
    criminal_group_name: str | None = None
    summary: str = ""

    def __post_init__(self):
        if len(self.locations) > 2:
            raise ValueError("at most two locations are retained")
        for name in ("victim_count", "child_victim_count", "corpse_count",
                     "civilians_killed_by_army", "falsos_positivos_count"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be non-negative")


_LABEL_RE = re.compile(r"(?:\A|(?<=[;\n]))[\s\"'*]*([A-Z]{1,2})\s*:")


def parse_response(raw: str, article_id: str = "",
                   diagnostics: dict[str, str] | None = None) -> ExtractionRecord:
    """Parse a raw response into an ExtractionRecord.

    Raises ParseFailure when no labeled answer can be recovered at all.
    Individual damaged fields become missing, with a note in `diagnostics`
    when a dict is supplied.
    """
    if diagnostics is None:
        diagnostics = {}
    if not raw or not raw.strip():
        raise ParseFailure("empty response")

    matches = [m for m in _LABEL_RE.finditer(raw) if m.group(1) in LABEL_INDEX]
    if not matches:
        raise ParseFailure("no labeled answers found")

    answers: dict[str, str] = {}
    summary = ""
    # (position, segment, is_final) fill-in candidates for unlabeled segments
    positional: list[tuple[int, str, bool]] = []

    # Leading unlabeled segments fill the positions just before the first label.
    lead = raw[: matches[0].start()].strip().strip(";").strip()
    if lead:
        segments = lead.split(";")
        first_idx = LABEL_INDEX[matches[0].group(1)]
        start = max(0, first_idx - len(segments))
        for offset, seg in enumerate(segments[len(segments) - (first_idx - start):]):
            positional.append((start + offset, seg, False))

    # Pass 1: explicit labels win. Extra segments in a region queue up as
    # positional candidates for the slots that follow the label.
    for i, m in enumerate(matches):
        label = m.group(1)
        region_end = matches[i + 1].start() if i + 1 < len(matches) else len(raw)
        region = raw[m.end(): region_end]
        is_last = i + 1 == len(matches)
        segments = region.split(";")
        position = LABEL_INDEX[label]
        for j, seg in enumerate(segments):
            final_segment = is_last and j == len(segments) - 1
            if j == 0:
                if final_segment:
                    answer, summary = _split_terminal(seg)
                    _assign(answers, diagnostics, label, answer)
                else:
                    _assign(answers, diagnostics, label, seg)
            else:
                positional.append((position + j, seg, final_segment))

    # Pass 2: positional fill-ins only land on slots no label claimed.
    for target, seg, final_segment in positional:
        if final_segment:
            if target >= len(LABELS) or LABELS[target] in answers:
                summary = seg.strip()
            else:
                answer, summary = _split_terminal(seg)
                answers[LABELS[target]] = answer
            continue
        if target >= len(LABELS):
            diagnostics.setdefault("_extra", "unassignable segments dropped")
        elif LABELS[target] not in answers:
            answers[LABELS[target]] = seg

    values: dict[str, object] = {"article_id": article_id, "summary": summary}
    for label, name, kind in FIELD_SPECS:
        raw_answer = answers.get(label)
        if raw_answer is None:
            values[name] = _MISSING[kind]
            continue
        values[name] = _parse_field(label, kind, raw_answer, diagnostics)
    return ExtractionRecord(**values)


def _assign(answers: dict[str, str], diagnostics: dict[str, str],
            label: str, segment: str) -> None:
    if label in answers:
        diagnostics[label] = "duplicate answer ignored"
        return
    answers[label] = segment


def _split_terminal(segment: str) -> tuple[str, str]:
    """Split the final answer segment into (answer, trailing summary)."""
    m = re.search(r"\.(?=\s|$)|\n", segment)
    if m is None:
        return segment, ""
    return segment[: m.start()], segment[m.end():].strip()


def _clean(answer: str) -> str:
    answer = answer.strip()
    if answer.endswith("."):
        answer = answer[:-1].rstrip()
    return answer


_MISSING: dict[str, object] = {
    "tri": TriState.UNKNOWN, "count": None, "str": None,
    "list": (), "monthyear": None, "date": None,
}


def _parse_field(label: str, kind: str, raw_answer: str,
                 diagnostics: dict[str, str]):
    answer = _clean(raw_answer)
    if answer == "" or answer == "-1":
        return _MISSING[kind]
    try:
        if kind == "tri":
            folded = fold(answer)
            if folded in ("yes", "si"):
                return TriState.YES
            if folded == "no":
                return TriState.NO
            diagnostics[label] = f"unrecognized yes/no answer: {answer!r}"
            return TriState.UNKNOWN
        if kind == "count":
            if fold(answer) in ("no", "none", "unknown"):
                return None
            m = re.search(r"-?\d+", answer)
            if m is None:
                diagnostics[label] = f"no integer in {answer!r}"
                return None
            value = int(m.group())
            if value < 0:
                diagnostics[label] = f"negative count {value}"
                return None
            return value
        if kind == "str":
            return answer
        if kind == "list":
            items = tuple(p.strip() for p in answer.split(",")
                          if p.strip() and p.strip() != "-1")
            if label == "M" and len(items) > 2:
                diagnostics[label] = "more than two locations; extra dropped"
                items = items[:2]
            return items
        if kind == "monthyear":
            return _parse_monthyear(answer, label, diagnostics)
        if kind == "date":
            return _parse_date(answer, label, diagnostics)
    except Exception as exc:  # any per-field surprise degrades to missing
        diagnostics[label] = f"{type(exc).__name__}: {exc}"
        return _MISSING[kind]
    raise AssertionError(f"unknown kind {kind}")


def _parse_monthyear(answer: str, label: str, diagnostics: dict[str, str]):
    folded = fold(answer).replace(" de ", " ").replace("/", " ").replace("-", " ")
    tokens = folded.split()
    year = month = None
    for tok in tokens:
        if re.fullmatch(r"\d{4}", tok) and year is None:
            year = int(tok)
        elif tok in _MONTH_LOOKUP and month is None:
            month = _MONTH_LOOKUP[tok]
        elif re.fullmatch(r"\d{1,2}", tok) and month is None and 1 <= int(tok) <= 12:
            month = int(tok)
    if year is None or month is None:
        diagnostics[label] = f"cannot read month/year from {answer!r}"
        return None
    return (month, year)


_DATE_RES = [
    (re.compile(r"(\d{1,2})[-/](\d{1,2})[-/](\d{4})"), ("m", "d", "y")),
    (re.compile(r"(\d{4})[-/](\d{1,2})[-/](\d{1,2})"), ("y", "m", "d")),
]


def _parse_date(answer: str, label: str, diagnostics: dict[str, str]):
    for rx, order in _DATE_RES:
        m = rx.search(answer)
        if m:
            parts = dict(zip(order, (int(g) for g in m.groups())))
            try:
                return dt.date(parts["y"], parts["m"], parts["d"])
            except ValueError:
                break
    diagnostics[label] = f"cannot read date from {answer!r}"
    return None


def serialize_record(record: ExtractionRecord) -> str:
    """Render a record back into the canonical response string."""
    parts = []
    for label, name, kind in FIELD_SPECS:
        parts.append(f"{label}: {_render_field(getattr(record, name), kind)}")
    body = "; ".join(parts) + "."
    if record.summary:
        body += " " + record.summary
    return body


def _render_field(value, kind: str) -> str:
    if kind == "tri":
        return {TriState.YES: "Yes", TriState.NO: "No", TriState.UNKNOWN: "-1"}[value]
    if value in (None, ()):
        return "-1"
    if kind == "count":
        return str(value)
    if kind == "str":
        return value
    if kind == "list":
        return ", ".join(value)
    if kind == "monthyear":
        month, year = value
        return f"{_MONTH_TITLE[month - 1]} {year}"
    if kind == "date":
        return value.strftime("%m-%d-%Y")
    raise AssertionError(f"unknown kind {kind}")


def record_to_json(record: ExtractionRecord) -> dict:
    out: dict[str, object] = {}
    for f in dc_fields(record):
        value = getattr(record, f.name)
        if isinstance(value, TriState):
            out[f.name] = value.value
        elif isinstance(value, tuple):
            out[f.name] = list(value)
        elif isinstance(value, dt.date):
            out[f.name] = value.isoformat()
        else:
            out[f.name] = value
    return out


def record_from_json(data: dict) -> ExtractionRecord:
    values: dict[str, object] = {
        "article_id": data.get("article_id", ""),
        "summary": data.get("summary", ""),
    }
    for label, name, kind in FIELD_SPECS:
        raw = data.get(name)
        if kind == "tri":
            values[name] = TriState(raw) if raw else TriState.UNKNOWN
        elif kind == "list":
            values[name] = tuple(raw or ())
        elif kind == "monthyear":
            values[name] = tuple(raw) if raw else None
        elif kind == "date":
            values[name] = dt.date.fromisoformat(raw) if raw else None
        else:
            values[name] = raw
    return ExtractionRecord(**values)
