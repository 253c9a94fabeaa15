"""Record linkage against a reference conflict dataset (CHM-style).

A pair matches when the months are the same or adjacent, the canonicalized
party lists satisfy the active rule (all: set equality of non-empty lists;
some: non-empty intersection, or both sides empty), the locations are within
the distance threshold (department equality standing in when either side has
no coordinates), and the violence types agree. The lower bound runs with the
strict party rule at 20 km, the upper with the loose rule at 40 km.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from eventminer.errors import ConfigError, ConsistencyError
from eventminer.geocode import GeoPoint, haversine_km
from eventminer.parsing import ExtractionRecord, TriState
from eventminer.textnorm import fold

REFERENCE_TYPES = frozenset({"kidnapping", "killing", "death", "massacre",
                             "attack", "terrorist_attack"})


@lru_cache(maxsize=1)
def party_table() -> dict[str, str]:
    """alias (folded) -> canonical party name, from the bundled table."""
    text = (resources.files("eventminer")
            / "data/party_canonical.json").read_text("utf-8")
    table: dict[str, str] = {}
    for canonical, aliases in json.loads(text).items():
        table[fold(canonical)] = canonical
        for alias in aliases:
            table[fold(alias)] = canonical
    return table


def canonicalize_party(name: str) -> str:
    """Canonical party for a raw mention; unmapped names fold to themselves."""
    folded = fold(name)
    return party_table().get(folded, folded)


def canonicalize_parties(names) -> frozenset[str]:
    return frozenset(canonicalize_party(n) for n in names
                     if n and fold(n) not in ("", "-1"))


@lru_cache(maxsize=1)
def _crosswalk() -> dict:
    text = (resources.files("eventminer")
            / "data/violence_crosswalk.json").read_text("utf-8")
    return json.loads(text)


def reference_violence_types(record: ExtractionRecord) -> frozenset[str]:
    """Map our tri-state violence flags into the reference taxonomy."""
    cw = _crosswalk()
    flag_attr = {
        "murder": "is_murder",
        "attack_or_injury": "is_attack_or_injury",
        "kidnapping": "is_kidnapping",
        "armed_conflict": "is_armed_conflict",
        "harassment_or_threats": "is_harassment_or_threats",
    }
    out: set[str] = set()
    for ours, targets in cw["map"].items():
        if getattr(record, flag_attr[ours]) is TriState.YES:
            out.update(targets)
    rule = cw.get("massacre_rule")
    if rule and getattr(record, flag_attr[rule["requires"]]) is TriState.YES:
        vc = record.victim_count
        if vc is not None and vc >= rule["min_victims"]:
            out.add(rule["adds"])
    return frozenset(out)


def event_parties(record: ExtractionRecord) -> frozenset[str]:
    """Canonical parties for one of our events: named lists plus flag-implied."""
    parties = set(canonicalize_parties(
        list(record.attackers) + list(record.group_names)
        + ([record.criminal_group_name] if record.criminal_group_name else [])))
    for attr, canonical in (("farc_involved", "farc"), ("auc_involved", "auc"),
                            ("eln_involved", "eln"), ("epl_involved", "epl")):
        if getattr(record, attr) is TriState.YES:
            parties.add(canonical)
    if record.army_combatant is TriState.YES:
        parties.add("state_forces")
    return frozenset(parties)


@dataclass(frozen=True)
class OurEvent:
    """Linkage-side view of one deduplicated event."""
    event_id: str
    month_year: tuple[int, int] | None  # (month, year)
    point: GeoPoint | None
    department: str | None
    parties: frozenset[str]
    violence_types: frozenset[str]

    @property
    def month_index(self) -> int | None:
        if self.month_year is None:
            return None
        month, year = self.month_year
        return year * 12 + (month - 1)


@dataclass(frozen=True)
class ReferenceEvent:
    ref_id: str
    year: int
    month: int
    day: int | None
    municipality: str
    department: str
    coordinates: GeoPoint | None
    parties: frozenset[str]
    violence_type: str
    victim_count: int | None = None

    def __post_init__(self):
        if self.violence_type not in REFERENCE_TYPES:
            raise ConsistencyError(
                f"violence_type {self.violence_type!r} not in the six retained "
                f"reference categories")

    @property
    def month_index(self) -> int:
        return self.year * 12 + (self.month - 1)


@dataclass(frozen=True)
class MatchCriteria:
    party_rule: str = "all"  # "all" (lower bound) | "some" (upper bound)
    max_distance_km: float = 20.0
    month_tolerance: int = 1  # adjacent months
    require_type_match: bool = True

    def __post_init__(self):
        if self.max_distance_km <= 0:
            raise ValueError("max_distance_km must be positive")
        if self.party_rule not in ("all", "some"):
            raise ValueError("party_rule must be 'all' or 'some'")


LOWER_BOUND = MatchCriteria(party_rule="all", max_distance_km=20.0)
UPPER_BOUND = MatchCriteria(party_rule="some", max_distance_km=40.0)


@dataclass(frozen=True)
class MatchPair:
    event_id: str
    ref_id: str
    month_diff: int
    distance_km: float | None  # None when matched on department equality


def _parties_match(ours: frozenset[str], ref: frozenset[str],
                   rule: str) -> bool:
    if rule == "all":
        # strict: identical non-empty canonical sets
        return bool(ours) and ours == ref
    if ours and ref:
        return bool(ours & ref)
    return not ours and not ref


def _location_match(our: OurEvent, ref: ReferenceEvent,
                    max_km: float) -> tuple[bool, float | None]:
    ref_point = ref.coordinates
    if our.point is not None and ref_point is not None:
        d = haversine_km(our.point, ref_point)
        return d <= max_km, d
    our_dept = our.department
    if our_dept and ref.department:
        return fold(our_dept) == fold(ref.department), None
    return False, None


def match_events(ours: list[OurEvent], reference: list[ReferenceEvent],
                 criteria: MatchCriteria) -> tuple[list[MatchPair], dict]:
    """All (our event, reference event) pairs satisfying the criteria.

    One-to-many matches are kept. Events with neither coordinates nor
    department, or without a month, are excluded and tallied.
    """
    by_month: dict[int, list[ReferenceEvent]] = {}
    for ref in reference:
        by_month.setdefault(ref.month_index, []).append(ref)

    pairs: list[MatchPair] = []
    excluded = {"no_month": 0, "no_location": 0}
    for our in ours:
        mi = our.month_index
        if mi is None:
            excluded["no_month"] += 1
            continue
        if our.point is None and not our.department:
            excluded["no_location"] += 1
            continue
        for month in range(mi - criteria.month_tolerance,
                           mi + criteria.month_tolerance + 1):
            for ref in by_month.get(month, ()):
                if criteria.require_type_match and \
                        ref.violence_type not in our.violence_types:
                    continue
                if not _parties_match(our.parties, ref.parties,
                                      criteria.party_rule):
                    continue
                ok, dist = _location_match(our, ref, criteria.max_distance_km)
                if not ok:
                    continue
                pairs.append(MatchPair(our.event_id, ref.ref_id,
                                       abs(mi - ref.month_index), dist))
    return pairs, excluded


@dataclass
class OverlapReport:
    ours_total: int
    ref_total: int
    ours_matched_lower: int
    ours_matched_upper: int
    ref_matched_lower: int
    ref_matched_upper: int
    lower_pairs: list[MatchPair] = field(default_factory=list)
    upper_pairs: list[MatchPair] = field(default_factory=list)
    excluded: dict = field(default_factory=dict)
    warning: str | None = None

    def fractions(self) -> dict:
        def frac(n, d):
            return n / d if d else 0.0
        return {
            "ours_lower": frac(self.ours_matched_lower, self.ours_total),
            "ours_upper": frac(self.ours_matched_upper, self.ours_total),
            "ref_lower": frac(self.ref_matched_lower, self.ref_total),
            "ref_upper": frac(self.ref_matched_upper, self.ref_total),
        }

    def as_dict(self) -> dict:
        return {
            "ours_total": self.ours_total,
            "ref_total": self.ref_total,
            "ours_matched": {"lower": self.ours_matched_lower,
                             "upper": self.ours_matched_upper},
            "ref_matched": {"lower": self.ref_matched_lower,
                            "upper": self.ref_matched_upper},
            "fractions": self.fractions(),
            "excluded": self.excluded,
            "warning": self.warning,
            "lower_pairs": [p.__dict__ for p in self.lower_pairs],
            "upper_pairs": [p.__dict__ for p in self.upper_pairs],
        }


def overlap_bounds(ours: list[OurEvent], reference: list[ReferenceEvent],
                   lower: MatchCriteria = LOWER_BOUND,
                   upper: MatchCriteria = UPPER_BOUND) -> OverlapReport:
    warning = "reference dataset is empty" if not reference else None
    lower_pairs, excluded = match_events(ours, reference, lower)
    upper_pairs, _ = match_events(ours, reference, upper)
    report = OverlapReport(
        ours_total=len(ours),
        ref_total=len(reference),
        ours_matched_lower=len({p.event_id for p in lower_pairs}),
        ours_matched_upper=len({p.event_id for p in upper_pairs}),
        ref_matched_lower=len({p.ref_id for p in lower_pairs}),
        ref_matched_upper=len({p.ref_id for p in upper_pairs}),
        lower_pairs=sorted(lower_pairs, key=lambda p: (p.event_id, p.ref_id)),
        upper_pairs=sorted(upper_pairs, key=lambda p: (p.event_id, p.ref_id)),
        excluded=excluded, warning=warning)
    if not (report.ours_matched_lower <= report.ours_matched_upper
            and report.ref_matched_lower <= report.ref_matched_upper):
        raise ConsistencyError("lower bound exceeded upper bound")
    return report


def load_reference(mapping_path: str | Path,
                   gazetteer: dict[str, tuple[float, float]] | None = None,
                   ) -> list[ReferenceEvent]:
    """Load per-category reference CSVs described by a mapping document.

    The mapping JSON lists one entry per file: its violence_type and the
    column names holding each field. Rows without coordinates fall back to
    gazetteer centroids for their municipality when one is supplied.
    """
    mapping_path = Path(mapping_path)
    try:
        mapping = json.loads(mapping_path.read_text("utf-8"))
        files = mapping["files"]
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"bad reference mapping {mapping_path}: {exc}") from exc

    events: list[ReferenceEvent] = []
    for entry in files:
        path = mapping_path.parent / entry["path"]
        vtype = entry["violence_type"]
        cols = entry["columns"]
        sep = entry.get("party_separator", "|")
        with open(path, newline="", encoding="utf-8") as fh:
            for i, row in enumerate(csv.DictReader(fh)):
                date_raw = (row.get(cols["date"]) or "").strip()
                year, month, day = _parse_ref_date(date_raw)
                if year is None:
                    continue  # undated rows cannot satisfy the month rule
                muni = (row.get(cols.get("municipality", ""), "") or "").strip()
                dept = (row.get(cols.get("department", ""), "") or "").strip()
                point = None
                lat_raw = row.get(cols.get("lat", ""), "")
                lon_raw = row.get(cols.get("lon", ""), "")
                if lat_raw and lon_raw:
                    try:
                        point = GeoPoint(float(lat_raw), float(lon_raw),
                                         muni or "reference", dept or None)
                    except ValueError:
                        point = None
                if point is None and gazetteer and fold(muni) in gazetteer:
                    lat, lon = gazetteer[fold(muni)]
                    point = GeoPoint(lat, lon, muni, dept or None)
                parties_raw = (row.get(cols.get("parties", ""), "") or "")
                parties = canonicalize_parties(
                    p for p in parties_raw.split(sep) if p.strip())
                vc = None
                vc_raw = (row.get(cols.get("victim_count", ""), "") or "").strip()
                if vc_raw:
                    try:
                        vc = max(0, int(float(vc_raw)))
                    except ValueError:
                        vc = None
                ref_id = (row.get(cols.get("ref_id", ""), "") or "").strip() \
                    or f"{entry['path']}:{i}"
                events.append(ReferenceEvent(
                    ref_id=ref_id, year=year, month=month, day=day,
                    municipality=muni, department=dept, coordinates=point,
                    parties=parties, violence_type=vtype, victim_count=vc))
    return events


def _parse_ref_date(raw: str) -> tuple[int | None, int, int | None]:
    """YYYY-MM-DD or YYYY-MM (separator - or /)."""
    raw = raw.replace("/", "-").strip()
    parts = [p for p in raw.split("-") if p]
    try:
        if len(parts) >= 3:
            d = dt.date(int(parts[0]), int(parts[1]), int(parts[2]))
            return d.year, d.month, d.day
        if len(parts) == 2:
            year, month = int(parts[0]), int(parts[1])
            if 1 <= month <= 12:
                return year, month, None
    except ValueError:
        pass
    return None, 0, None


def municipality_centroids() -> dict[str, tuple[float, float]]:
    """Folded municipality name -> (lat, lon) from the bundled table."""
    text = (resources.files("eventminer")
            / "data/municipalities.csv").read_text("utf-8")
    out: dict[str, tuple[float, float]] = {}
    for row in csv.DictReader(io.StringIO(text)):
        out[fold(row["name"])] = (float(row["latitude"]),
                                  float(row["longitude"]))
    return out


def municipality_departments() -> dict[str, str]:
    """Folded municipality name -> department from the bundled table."""
    text = (resources.files("eventminer")
            / "data/municipalities.csv").read_text("utf-8")
    return {fold(row["name"]): row["department"]
            for row in csv.DictReader(io.StringIO(text))}
