"""Staged pipeline with content-addressed artifacts.

Each stage reads the previous stage's artifact and writes its own under
`<output_dir>/artifacts/` as JSONL named `<stage>.<digest>.jsonl`, with
`manifest.json` mapping stage names to current filenames. Artifacts carry no
timestamps, so identical inputs produce byte-identical trees; the geocode
cache, which does record timestamps, lives outside the artifact directory.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from eventminer import linkage as lk
from eventminer import regress as rg
from eventminer.corpus import Article, load_corpus
from eventminer.dedup.blocking import generate_candidate_pairs, resolve_event_date
from eventminer.dedup.cluster import cluster_duplicates, finalize_clusters
from eventminer.dedup.features import ArticleView, compute_pair_features
from eventminer.dedup.forest import TrainedClassifier, pair_key, score_pairs
from eventminer.errors import (ConfigError, ConsistencyError,
                               TransportExhausted)
from eventminer.evaluation import VIOLENCE_FLAGS, violence_types
from eventminer.extract import run_extraction
from eventminer.filters import (EventScope, apply_inclusion_filters,
                                classify_event_scope)
from eventminer.geocode import (FixtureGeoClient, GeoCache, GeoPoint,
                                HTTPGeoClient, geocode_location)
from eventminer.parsing import record_from_json, record_to_json
from eventminer.prompt import load_prompt_template
from eventminer.transport import (FixtureTransport, HTTPChatTransport,
                                  TransportPolicy)

STAGES = ("ingest", "extract", "filter", "geocode", "dedup", "link",
          "regress", "report")


# ---------------------------------------------------------------- config

@dataclass
class RunConfig:
    corpus_path: str
    output_dir: str
    corpus_format: str = "jsonl"
    min_chars: int = 500
    template_path: str | None = None
    transport: dict = field(default_factory=dict)
    scope_transport: dict | None = None
    geocoder: dict = field(default_factory=dict)
    dedup: dict = field(default_factory=dict)
    linkage: dict | None = None
    regression: dict | None = None
    seed: int = 7
    max_in_flight: int = 1

    def artifacts_dir(self) -> Path:
        return Path(self.output_dir) / "artifacts"

    def cache_dir(self) -> Path:
        return Path(self.output_dir) / "cache"


_PATH_FIELDS = (
    ("corpus_path", None),
    ("template_path", None),
    ("transport", "root"),
    ("scope_transport", "root"),
    ("geocoder", "path"),
    ("dedup", "model_path"),
    ("linkage", "reference_dir"),
    ("regression", "eradication_path"),
    ("regression", "specs_path"),
)


def load_run_config(path: str | Path) -> RunConfig:
    """Read a run config; relative paths resolve against the config file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text("utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read run config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("run config must be a JSON object")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "corpus_path" not in data or "output_dir" not in data:
        raise ConfigError("config requires corpus_path and output_dir")
    config = RunConfig(**data)

    base = path.parent.resolve()

    def resolve(raw: str) -> str:
        p = Path(raw)
        return str(p if p.is_absolute() else base / p)

    config.corpus_path = resolve(config.corpus_path)
    config.output_dir = resolve(config.output_dir)
    if config.template_path:
        config.template_path = resolve(config.template_path)
    for section, key in _PATH_FIELDS:
        if key is None:
            continue
        holder = getattr(config, section)
        if isinstance(holder, dict) and holder.get(key):
            holder[key] = resolve(holder[key])
    return config


def validate_config(config: RunConfig, exempt: frozenset[str] = frozenset(),
                    ) -> None:
    """Every referenced input path must exist. `exempt` holds dotted names
    of paths a command is about to create (e.g. dedup.model_path when
    training)."""
    for section, key in _PATH_FIELDS:
        if key is None:
            dotted, raw = section, getattr(config, section)
        else:
            holder = getattr(config, section)
            if not isinstance(holder, dict):
                continue
            dotted, raw = f"{section}.{key}", holder.get(key)
        if not raw or dotted in exempt:
            continue
        if not Path(raw).exists():
            raise ConfigError(f"{dotted} does not exist: {raw}")
    for name in ("transport", "scope_transport", "geocoder"):
        cfg = getattr(config, name)
        if cfg and cfg.get("kind") not in (None, "fixture", "http"):
            raise ConfigError(f"{name}.kind must be 'fixture' or 'http'")
    if config.max_in_flight < 1:
        raise ConfigError("max_in_flight must be >= 1")


# ---------------------------------------------------------------- storage

def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


class ArtifactStore:
    """Digest-named stage artifacts plus a manifest of current filenames."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.manifest_path = self.root / "manifest.json"

    def _manifest(self) -> dict[str, str]:
        if not self.manifest_path.exists():
            return {}
        return json.loads(self.manifest_path.read_text("utf-8"))

    def _save(self, stage: str, payload: str, ext: str) -> Path:
        digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]
        name = f"{stage}.{digest}.{ext}"
        target = self.root / name
        target.write_text(payload, encoding="utf-8")
        manifest = self._manifest()
        stale = manifest.get(stage)
        manifest[stage] = name
        self.manifest_path.write_text(
            json.dumps(manifest, sort_keys=True, indent=2) + "\n", "utf-8")
        if stale and stale != name and (self.root / stale).exists():
            (self.root / stale).unlink()
        return target

    def write_rows(self, stage: str, rows: list[dict]) -> Path:
        payload = "".join(_dumps(r) + "\n" for r in rows)
        return self._save(stage, payload, "jsonl")

    def write_json(self, stage: str, obj: dict) -> Path:
        return self._save(stage, _dumps(obj) + "\n", "json")

    def has(self, stage: str) -> bool:
        name = self._manifest().get(stage)
        return bool(name) and (self.root / name).exists()

    def _path_for(self, stage: str) -> Path:
        name = self._manifest().get(stage)
        if not name or not (self.root / name).exists():
            raise ConfigError(
                f"artifact for stage {stage!r} not found; run that stage first")
        return self.root / name

    def read_rows(self, stage: str) -> list[dict]:
        with open(self._path_for(stage), encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]

    def read_json(self, stage: str) -> dict:
        return json.loads(self._path_for(stage).read_text("utf-8"))


def _point_to_json(point: GeoPoint | None) -> dict | None:
    if point is None:
        return None
    return {"latitude": point.latitude, "longitude": point.longitude,
            "resolved_name": point.resolved_name,
            "department": point.department}


def _point_from_json(data: dict | None) -> GeoPoint | None:
    if data is None:
        return None
    return GeoPoint(data["latitude"], data["longitude"],
                    data["resolved_name"], data.get("department"))


# ---------------------------------------------------------------- adapters

def _policy_from(cfg: dict) -> TransportPolicy:
    return TransportPolicy(
        model_id=cfg.get("model_id", "gpt-4o-mini"),
        temperature=float(cfg.get("temperature", 0.0)),
        max_attempts=int(cfg.get("max_attempts", 3)),
        backoff_schedule=tuple(cfg.get("backoff_schedule", (0.5, 1.0, 2.0))),
        rate_limit=cfg.get("rate_limit"),
    )


def _make_transport(cfg: dict):
    kind = cfg.get("kind", "fixture")
    if kind == "fixture":
        root = cfg.get("root")
        if not root:
            raise ConfigError("fixture transport requires 'root'")
        return FixtureTransport(root), _policy_from(cfg)
    endpoint = cfg.get("endpoint")
    if not endpoint:
        raise ConfigError("http transport requires 'endpoint'")
    return (HTTPChatTransport(endpoint,
                              api_key_env=cfg.get("api_key_env",
                                                  "EVENTMINER_API_KEY"),
                              timeout=float(cfg.get("timeout", 60.0))),
            _policy_from(cfg))


def _make_geocoder(cfg: dict):
    kind = cfg.get("kind", "fixture")
    if kind == "fixture":
        path = cfg.get("path")
        if not path:
            raise ConfigError("fixture geocoder requires 'path'")
        return FixtureGeoClient(path)
    endpoint = cfg.get("endpoint")
    if not endpoint:
        raise ConfigError("http geocoder requires 'endpoint'")
    return HTTPGeoClient(endpoint, timeout=float(cfg.get("timeout", 30.0)))


# ---------------------------------------------------------------- stages

def stage_ingest(config: RunConfig, store: ArtifactStore) -> None:
    articles, manifest = load_corpus(config.corpus_path, config.corpus_format,
                                     config.min_chars)
    rows = [{"article_id": a.article_id, "source": a.source,
             "publication_date": a.publication_date.isoformat(),
             "text": a.text, "scan_ref": a.scan_ref} for a in articles]
    store.write_rows("ingest", rows)
    store.write_json("ingest.meta", {
        "total_loaded": manifest.total_loaded,
        "dropped_short": manifest.dropped_short,
        "dropped_malformed": manifest.dropped_malformed,
        "retained": len(manifest.retained_ids)})


def _articles_from_rows(rows: list[dict]) -> list[Article]:
    return [Article(article_id=r["article_id"], source=r.get("source", ""),
                    publication_date=dt.date.fromisoformat(
                        r["publication_date"]),
                    text=r["text"], scan_ref=r.get("scan_ref"))
            for r in rows]


def stage_extract(config: RunConfig, store: ArtifactStore) -> None:
    articles = _articles_from_rows(store.read_rows("ingest"))
    transport, policy = _make_transport(config.transport)
    template = load_prompt_template(config.template_path)
    outcome = run_extraction(articles, transport, policy, template,
                             max_in_flight=config.max_in_flight)
    by_id = {r.article_id: r for r in outcome.records}
    rows = []
    for article in articles:
        record = by_id.get(article.article_id)
        rows.append({
            "article_id": article.article_id,
            "status": "ok" if record is not None
            else outcome.failures[article.article_id],
            "raw": outcome.raw_responses.get(article.article_id),
            "record": record_to_json(record) if record is not None else None,
        })
    store.write_rows("extract", rows)
    meta = {"input": len(articles), "extracted": len(outcome.records)}
    for reason in ("parse_failure", "transport_exhausted"):
        meta[reason] = sum(1 for r in outcome.failures.values() if r == reason)
    store.write_json("extract.meta", meta)


def _extracted_records(store: ArtifactStore):
    return [record_from_json(r["record"]) for r in store.read_rows("extract")
            if r["status"] == "ok"]


def stage_filter(config: RunConfig, store: ArtifactStore) -> None:
    records = _extracted_records(store)
    transport, policy = _make_transport(config.scope_transport
                                        or config.transport)
    scopes: dict[str, EventScope] = {}
    scope_counts: dict[str, int] = {}
    scope_failed = 0
    for record in records:
        if not record.summary.strip():
            # no summary to classify; treat as multi-event (conservative)
            scope = EventScope.MULTIPLE_DISTINCT
        else:
            try:
                scope = classify_event_scope(record.summary, transport,
                                             policy, key=record.article_id)
            except TransportExhausted:
                scope = EventScope.MULTIPLE_DISTINCT
                scope_failed += 1
        scopes[record.article_id] = scope
        scope_counts[scope.value] = scope_counts.get(scope.value, 0) + 1
    retained, report = apply_inclusion_filters(records, scopes)
    store.write_rows("filter", [record_to_json(r) for r in retained])
    meta = report.as_dict()
    meta["scopes"] = scope_counts
    meta["scope_transport_failed"] = scope_failed
    store.write_json("filter.meta", meta)


def stage_geocode(config: RunConfig, store: ArtifactStore) -> None:
    records = [record_from_json(r) for r in store.read_rows("filter")]
    client = _make_geocoder(config.geocoder)
    config.cache_dir().mkdir(parents=True, exist_ok=True)
    cache = GeoCache(config.cache_dir() / "geocode.jsonl")
    policy = _policy_from(config.geocoder)
    rows = []
    with_location = geocoded = 0
    for record in records:
        point = None
        if record.locations:
            with_location += 1
            point = geocode_location(record.locations[0], client, cache,
                                     policy=policy)
            if point is not None:
                geocoded += 1
        rows.append({"article_id": record.article_id,
                     "point": _point_to_json(point)})
    store.write_rows("geocode", rows)
    store.write_json("geocode.meta", {
        "input": len(records), "with_location": with_location,
        "geocoded": geocoded})


def _event_row(cluster, records, points) -> dict:
    record = records[cluster.representative_id]
    point = points.get(cluster.representative_id)
    event_date = resolve_event_date(record)
    month_year = record.event_month_year
    if month_year is None and event_date is not None:
        month_year = (event_date.month, event_date.year)
    year = None
    if event_date is not None:
        year = event_date.year
    elif month_year is not None:
        year = month_year[1]
    return {
        "event_id": cluster.cluster_id,
        "members": list(cluster.members),
        "member_count": len(cluster.members),
        "representative": cluster.representative_id,
        "mean_score": cluster.mean_score,
        "record": record_to_json(record),
        "point": _point_to_json(point),
        "department": point.department if point is not None else None,
        "event_date": event_date.isoformat() if event_date else None,
        "event_month_year": list(month_year) if month_year else None,
        "year": year,
        "violence_types": sorted(violence_types(record)),
        "reference_types": sorted(lk.reference_violence_types(record)),
        "parties": sorted(lk.event_parties(record)),
    }


def stage_dedup(config: RunConfig, store: ArtifactStore) -> None:
    model_path = config.dedup.get("model_path")
    if not model_path:
        raise ConfigError("dedup stage requires dedup.model_path")
    model = TrainedClassifier.load(model_path)
    cutoff = float(config.dedup.get("cutoff", 0.95))
    shingle_n = int(config.dedup.get("shingle_n", 2))
    window = int(config.dedup.get("blocking_window_days", 31))

    records = [record_from_json(r) for r in store.read_rows("filter")]
    texts = {r["article_id"]: r["text"] for r in store.read_rows("ingest")}
    points = {r["article_id"]: _point_from_json(r["point"])
              for r in store.read_rows("geocode")}
    records_by_id = {r.article_id: r for r in records}

    views = {}
    for record in records:
        views[record.article_id] = ArticleView(
            record=record, text=texts.get(record.article_id, ""),
            point=points.get(record.article_id),
            event_date=resolve_event_date(record))

    pairs = generate_candidate_pairs(records, window_days=window)
    features = [compute_pair_features(views[a], views[b], shingle_n=shingle_n)
                for a, b in pairs]
    scores = score_pairs(model, features) if features else []
    scored = [(a, b, float(s)) for (a, b), s in zip(pairs, scores)]

    clusters = cluster_duplicates(scored, cutoff,
                                  all_ids=sorted(records_by_id))
    clusters = finalize_clusters(clusters, records_by_id, points)

    store.write_rows("dedup", [
        {"cluster_id": c.cluster_id, "members": list(c.members),
         "representative_id": c.representative_id,
         "mean_score": c.mean_score} for c in clusters])
    store.write_rows("events",
                     [_event_row(c, records_by_id, points) for c in clusters])
    n = len(records)
    store.write_json("dedup.meta", {
        "articles": n, "candidate_pairs": len(pairs),
        "edges_at_cutoff": sum(1 for _, _, s in scored if s >= cutoff),
        "clusters": len(clusters),
        "duplicate_fraction": (1.0 - len(clusters) / n) if n else 0.0,
        "cutoff": cutoff, "model_digest": model.config_digest})


def our_events_from_rows(rows: list[dict]) -> list[lk.OurEvent]:
    events = []
    for row in rows:
        month_year = row.get("event_month_year")
        events.append(lk.OurEvent(
            event_id=row["event_id"],
            month_year=tuple(month_year) if month_year else None,
            point=_point_from_json(row.get("point")),
            department=row.get("department"),
            parties=frozenset(row.get("parties", ())),
            violence_types=frozenset(row.get("reference_types", ()))))
    return events


def _criteria_from(cfg: dict | None, default: lk.MatchCriteria,
                   ) -> lk.MatchCriteria:
    if not cfg:
        return default
    return lk.MatchCriteria(
        party_rule=cfg.get("party_rule", default.party_rule),
        max_distance_km=float(cfg.get("max_distance_km",
                                      default.max_distance_km)),
        month_tolerance=int(cfg.get("month_tolerance",
                                    default.month_tolerance)),
        require_type_match=bool(cfg.get("require_type_match",
                                        default.require_type_match)))


def stage_link(config: RunConfig, store: ArtifactStore) -> None:
    if not config.linkage or not config.linkage.get("reference_dir"):
        raise ConfigError("link stage requires linkage.reference_dir")
    mapping = Path(config.linkage["reference_dir"]) / "mapping.json"
    reference = lk.load_reference(mapping, lk.municipality_centroids())
    ours = our_events_from_rows(store.read_rows("events"))
    lower = _criteria_from(config.linkage.get("lower"), lk.LOWER_BOUND)
    upper = _criteria_from(config.linkage.get("upper"), lk.UPPER_BOUND)
    report = lk.overlap_bounds(ours, reference, lower, upper)
    store.write_json("link", report.as_dict())


def _model_spec_from(data: dict) -> rg.ModelSpec:
    kwargs = dict(data)
    if "fixed_effects" in kwargs:
        kwargs["fixed_effects"] = tuple(kwargs["fixed_effects"])
    return rg.ModelSpec(**kwargs)


def stage_regress(config: RunConfig, store: ArtifactStore) -> None:
    if not config.regression or not config.regression.get("eradication_path"):
        raise ConfigError("regress stage requires regression.eradication_path")
    eradication = rg.load_eradication_csv(
        config.regression["eradication_path"])
    specs_cfg = config.regression.get("specs")
    if specs_cfg is None and config.regression.get("specs_path"):
        specs_cfg = json.loads(
            Path(config.regression["specs_path"]).read_text("utf-8"))
    specs = ([_model_spec_from(d) for d in specs_cfg]
             if specs_cfg else [rg.ModelSpec()])

    events = []
    skipped = 0
    for row in store.read_rows("events"):
        if not row.get("department") or row.get("year") is None:
            skipped += 1
            continue
        events.append(rg.EventObs(
            event_id=row["event_id"], department=row["department"],
            year=int(row["year"]),
            violence_types=frozenset(row.get("violence_types", ()))))

    rows = []
    panel_meta: dict = {}
    for outcome in sorted({s.outcome for s in specs}):
        group = [s for s in specs if s.outcome == outcome]
        panel, meta = rg.build_panel(events, eradication, group[0])
        panel_meta[outcome] = meta
        results, _summary = rg.robustness_grid(panel, group)
        for spec, result, error in results:
            rows.append({
                "spec": dataclasses.asdict(spec), "label": spec.label(),
                "status": "ok" if result is not None else "failed",
                "error": error,
                "result": result.as_dict() if result is not None else None,
                "table": (result.table_rows(include_fe=False)
                          if result is not None else None)})
    store.write_rows("regress", rows)
    store.write_json("regress.meta", {
        "events_used": len(events), "events_skipped": skipped,
        "specs": len(specs), "panels": panel_meta})


# ---------------------------------------------------------------- report

@dataclass
class PipelineReport:
    loaded: int
    prescreened: int
    extracted: int
    extraction_failures: dict[str, int]
    filtered: dict[str, int]
    retained: int
    geocoded: int
    clusters: int
    events: int
    duplicate_fraction: float
    per_year: dict[str, int]
    per_type: dict[str, int]

    def check(self) -> None:
        """Stage accounting must reconcile exactly."""
        failed = sum(self.extraction_failures.values())
        if self.prescreened != self.extracted + failed:
            raise ConsistencyError("extract counts do not reconcile")
        if self.extracted != self.retained + sum(self.filtered.values()):
            raise ConsistencyError("filter counts do not reconcile")
        if self.clusters != self.events:
            raise ConsistencyError("every cluster must yield one event")
        if sum(self.per_type.values()) < 0 or self.retained < 0:
            raise ConsistencyError("negative counts")

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def build_report(store: ArtifactStore) -> PipelineReport:
    ingest = store.read_json("ingest.meta")
    extract = store.read_json("extract.meta")
    filt = store.read_json("filter.meta")
    geo = store.read_json("geocode.meta")
    dedup = store.read_json("dedup.meta")
    events = store.read_rows("events")

    per_year: dict[str, int] = {}
    per_type: dict[str, int] = {}
    member_total = 0
    for row in events:
        member_total += row["member_count"]
        year = row.get("year")
        if year is not None:
            per_year[str(year)] = per_year.get(str(year), 0) + 1
        for name in row.get("violence_types", ()):
            per_type[name] = per_type.get(name, 0) + 1

    report = PipelineReport(
        loaded=ingest["total_loaded"],
        prescreened=ingest["retained"],
        extracted=extract["extracted"],
        extraction_failures={
            k: extract[k] for k in ("parse_failure", "transport_exhausted")},
        filtered=dict(filt["dropped"]),
        retained=filt["retained_count"],
        geocoded=geo["geocoded"],
        clusters=dedup["clusters"],
        events=len(events),
        duplicate_fraction=dedup["duplicate_fraction"],
        per_year=dict(sorted(per_year.items())),
        per_type=dict(sorted(per_type.items())))
    if member_total != report.retained:
        raise ConsistencyError(
            "cluster members do not account for every retained article")
    report.check()
    return report


def stage_report(config: RunConfig, store: ArtifactStore) -> PipelineReport:
    report = build_report(store)
    store.write_json("report", report.as_dict())
    return report


_STAGE_FUNCS = {
    "ingest": stage_ingest,
    "extract": stage_extract,
    "filter": stage_filter,
    "geocode": stage_geocode,
    "dedup": stage_dedup,
    "link": stage_link,
    "regress": stage_regress,
    "report": stage_report,
}


def run_pipeline(config: RunConfig, stages: list[str] | None = None,
                 ) -> PipelineReport | None:
    """Execute the requested stages in pipeline order."""
    wanted = list(stages) if stages else list(STAGES)
    unknown = [s for s in wanted if s not in STAGES]
    if unknown:
        raise ConfigError(f"unknown stages: {unknown}; valid: {list(STAGES)}")
    store = ArtifactStore(config.artifacts_dir())
    report = None
    for stage in STAGES:
        if stage not in wanted:
            continue
        result = _STAGE_FUNCS[stage](config, store)
        if stage == "report":
            report = result
    return report


# ---------------------------------------------------------------- export

EXPORT_TYPE_NAMES = tuple(name for name, _attr in VIOLENCE_FLAGS)

_CSV_COLUMNS = ("event_id", "event_date", "year", "department", "latitude",
                "longitude", "location", "victim_count", "violence_types",
                "parties", "member_count", "representative", "summary")


def _known_parties() -> set[str]:
    return set(lk.party_table().values())


def parse_export_filters(years: str | None, attackers: str | None,
                         types: str | None) -> dict:
    """Validate CLI filter strings; unknown values raise ConfigError."""
    out: dict = {"years": None, "attackers": None, "types": None}
    if years:
        try:
            out["years"] = {int(y) for y in years.split(",") if y.strip()}
        except ValueError as exc:
            raise ConfigError(f"bad year filter {years!r}") from exc
    if attackers:
        known = _known_parties()
        chosen = set()
        for raw in attackers.split(","):
            raw = raw.strip()
            if not raw:
                continue
            canonical = lk.canonicalize_party(raw)
            if canonical not in known:
                raise ConfigError(f"unknown attacker filter value {raw!r}")
            chosen.add(canonical)
        out["attackers"] = chosen
    if types:
        chosen = set()
        for raw in types.split(","):
            raw = raw.strip()
            if not raw:
                continue
            if raw not in EXPORT_TYPE_NAMES:
                raise ConfigError(
                    f"unknown type filter value {raw!r}; "
                    f"valid: {list(EXPORT_TYPE_NAMES)}")
            chosen.add(raw)
        out["types"] = chosen
    return out


def _event_passes(row: dict, filters: dict) -> bool:
    if filters["years"] is not None and row.get("year") not in filters["years"]:
        return False
    if filters["attackers"] is not None and \
            not (set(row.get("parties", ())) & filters["attackers"]):
        return False
    if filters["types"] is not None and \
            not (set(row.get("violence_types", ())) & filters["types"]):
        return False
    return True


def export_events(event_rows: list[dict], format: str, out_path: str | Path,
                  years: str | None = None, attackers: str | None = None,
                  types: str | None = None) -> dict:
    """Write filtered events as CSV or GeoJSON; returns counts."""
    if format not in ("csv", "geojson"):
        raise ConfigError(f"unknown export format {format!r}")
    filters = parse_export_filters(years, attackers, types)
    selected = [r for r in event_rows if _event_passes(r, filters)]
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    if format == "csv":
        import csv as _csv
        with open(out_path, "w", newline="", encoding="utf-8") as fh:
            writer = _csv.writer(fh)
            writer.writerow(_CSV_COLUMNS)
            for row in selected:
                record = row["record"]
                point = row.get("point") or {}
                writer.writerow([
                    row["event_id"], row.get("event_date") or "",
                    row.get("year") if row.get("year") is not None else "",
                    row.get("department") or "",
                    point.get("latitude", ""), point.get("longitude", ""),
                    (record.get("locations") or [""])[0],
                    record.get("victim_count")
                    if record.get("victim_count") is not None else "",
                    "|".join(row.get("violence_types", ())),
                    "|".join(row.get("parties", ())),
                    row["member_count"], row["representative"],
                    record.get("summary", "")])
        return {"written": len(selected), "excluded_no_coordinates": 0}

    features = []
    skipped = 0
    for row in selected:
        point = row.get("point")
        if point is None:
            skipped += 1
            continue
        record = row["record"]
        properties = {"event_id": row["event_id"], "year": row.get("year"),
                      "summary": record.get("summary", "")}
        for name in EXPORT_TYPE_NAMES:
            properties[f"type_{name}"] = name in row.get("violence_types", ())
        for party in sorted(_known_parties()):
            properties[f"party_{party}"] = party in row.get("parties", ())
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point",
                         "coordinates": [point["longitude"],
                                         point["latitude"]]},
            "properties": properties})
    collection = {"type": "FeatureCollection", "features": features}
    out_path.write_text(_dumps(collection) + "\n", "utf-8")
    if skipped:
        note = out_path.with_name(out_path.name + ".note.json")
        note.write_text(_dumps({"excluded_without_coordinates": skipped})
                        + "\n", "utf-8")
    return {"written": len(features), "excluded_no_coordinates": skipped}


# ---------------------------------------------------------------- calibrate

@dataclass(frozen=True)
class CalibrationResult:
    cutoff: float
    achieved_rate: float
    warning: str | None = None


def calibrate_cutoff(scored_pairs: list[tuple[str, str, float]],
                     target_rate: float,
                     all_ids: list[str] | None = None,
                     iterations: int = 30) -> CalibrationResult:
    """Binary-search the score cutoff whose duplicate rate is nearest the
    target. The rate is 1 - clusters/articles, nonincreasing in the cutoff."""
    if not 0.0 <= target_rate < 1.0:
        raise ConfigError("target rate must be in [0, 1)")
    ids = set(all_ids or ())
    for a, b, _s in scored_pairs:
        ids.update((a, b))
    n = len(ids)
    if n == 0:
        raise ConfigError("no articles to calibrate on")

    def rate(cutoff: float) -> float:
        return 1.0 - len(cluster_duplicates(scored_pairs, cutoff,
                                            all_ids=sorted(ids))) / n

    if target_rate == 0.0:
        return CalibrationResult(1.0, rate(1.0), None)
    scores = {s for _a, _b, s in scored_pairs}
    if len(scores) <= 1:
        return CalibrationResult(
            1.0, rate(1.0),
            "all pair scores identical; returning boundary cutoff")

    lo, hi = 0.0, 1.0
    for _ in range(iterations):
        mid = (lo + hi) / 2.0
        if rate(mid) > target_rate:
            lo = mid
        else:
            hi = mid
    rate_lo, rate_hi = rate(lo), rate(hi)
    if abs(rate_hi - target_rate) <= abs(rate_lo - target_rate):
        return CalibrationResult(hi, rate_hi, None)
    return CalibrationResult(lo, rate_lo, None)
