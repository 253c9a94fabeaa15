"""Command-line surface: `pipeline <command>`.

Exit codes: 0 success, 1 stage failure, 2 validation/usage failure.
All commands take --config pointing at the run configuration; artifacts are
read from and written to its output directory.
"""

from __future__ import annotations

import dataclasses
import functools
import json
import sys
from pathlib import Path

import click

from eventminer import pipeline as pl
from eventminer import regress as rg
from eventminer.dedup.blocking import generate_candidate_pairs, resolve_event_date
from eventminer.dedup.features import ArticleView, DedupConfig, compute_pair_features
from eventminer.dedup.forest import (TrainedClassifier, load_pair_labels,
                                     pair_key, score_pairs, train_classifier)
from eventminer.errors import ConfigError, EventMinerError
from eventminer.evaluation import evaluate_extraction, load_labels_csv
from eventminer.linkage import (LOWER_BOUND, UPPER_BOUND, load_reference,
                                municipality_centroids, overlap_bounds)
from eventminer.parsing import record_from_json


def _exits(fn):
    """Map domain errors onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(2)
        except EventMinerError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


def _load(config_path: str, exempt: frozenset[str] = frozenset(),
          ) -> tuple[pl.RunConfig, pl.ArtifactStore]:
    config = pl.load_run_config(config_path)
    pl.validate_config(config, exempt=exempt)
    return config, pl.ArtifactStore(config.artifacts_dir())


def _stage_exemptions(stages: list[str]) -> frozenset[str]:
    """Paths are validated only when some requested stage consumes them."""
    exempt = set()
    if "extract" not in stages:
        exempt.add("transport.root")
    if "filter" not in stages:
        exempt.add("scope_transport.root")
    if "geocode" not in stages:
        exempt.add("geocoder.path")
    if "dedup" not in stages:
        exempt.add("dedup.model_path")
    if "link" not in stages:
        exempt.add("linkage.reference_dir")
    if "regress" not in stages:
        exempt.update(("regression.eradication_path", "regression.specs_path"))
    return frozenset(exempt)


@click.group(name="pipeline")
def main() -> None:
    """Turn OCR'd Spanish news articles into a deduplicated event dataset."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(), help="Run configuration JSON.")
@click.option("--stages", "stages_csv", default=None,
              help="Comma-separated subset of: " + ",".join(pl.STAGES))
@_exits
def run(config_path: str, stages_csv: str | None) -> None:
    """Execute pipeline stages in order."""
    stages = ([s.strip() for s in stages_csv.split(",") if s.strip()]
              if stages_csv else list(pl.STAGES))
    unknown = [s for s in stages if s not in pl.STAGES]
    if unknown:
        raise ConfigError(f"unknown stages: {unknown}")
    config = pl.load_run_config(config_path)
    pl.validate_config(config, exempt=_stage_exemptions(stages))
    report = pl.run_pipeline(config, stages)
    for stage in stages:
        click.echo(f"stage {stage}: done")
    if report is not None:
        click.echo(f"events: {report.events}  "
                   f"duplicate_fraction: {report.duplicate_fraction:.3f}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--format", "fmt", required=True,
              type=click.Choice(["csv", "geojson"]))
@click.option("--years", default=None, help="Comma-separated years.")
@click.option("--attackers", default=None,
              help="Comma-separated party names (canonical or alias).")
@click.option("--types", default=None,
              help="Comma-separated violence types.")
@click.option("--out", "out_path", default=None, type=click.Path())
@_exits
def export(config_path: str, fmt: str, years: str | None,
           attackers: str | None, types: str | None,
           out_path: str | None) -> None:
    """Export deduplicated events as CSV or GeoJSON."""
    config, store = _load(config_path,
                          exempt=_stage_exemptions(["export"]))
    rows = store.read_rows("events")
    if out_path is None:
        out_path = str(Path(config.output_dir) / f"events.{fmt}")
    counts = pl.export_events(rows, fmt, out_path, years=years,
                              attackers=attackers, types=types)
    click.echo(f"wrote {counts['written']} events to {out_path}")
    if counts["excluded_no_coordinates"]:
        click.echo(f"excluded {counts['excluded_no_coordinates']} events "
                   f"without coordinates (see sidecar note)")


@main.group()
def dedup() -> None:
    """Train and calibrate the duplicate classifier."""


def _dedup_config(config: pl.RunConfig, seed: int | None) -> DedupConfig:
    cfg = config.dedup or {}
    fields = {f.name for f in dataclasses.fields(DedupConfig)}
    kwargs = {k: v for k, v in cfg.items() if k in fields}
    if seed is not None:
        kwargs["seed"] = seed
    kwargs.setdefault("seed", config.seed)
    return DedupConfig(**kwargs)


def _views_from_artifacts(store: pl.ArtifactStore) -> dict[str, ArticleView]:
    records = [record_from_json(r) for r in store.read_rows("filter")]
    texts = {r["article_id"]: r["text"] for r in store.read_rows("ingest")}
    points = {r["article_id"]: pl._point_from_json(r["point"])
              for r in store.read_rows("geocode")}
    return {r.article_id: ArticleView(record=r,
                                      text=texts.get(r.article_id, ""),
                                      point=points.get(r.article_id),
                                      event_date=resolve_event_date(r))
            for r in records}


@dedup.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--labels", "labels_path", required=True, type=click.Path())
@click.option("--seed", default=None, type=int,
              help="Override the configured seed.")
@_exits
def train(config_path: str, labels_path: str, seed: int | None) -> None:
    """Train the pair classifier on labeled pairs and save it."""
    config, store = _load(config_path,
                          exempt=frozenset({"dedup.model_path",
                                            "linkage.reference_dir",
                                            "regression.eradication_path",
                                            "regression.specs_path"}))
    model_path = (config.dedup or {}).get("model_path")
    if not model_path:
        raise ConfigError("config must set dedup.model_path")
    labels = load_pair_labels(labels_path)
    if not labels:
        raise ConfigError(f"no labels in {labels_path}")
    dcfg = _dedup_config(config, seed)
    views = _views_from_artifacts(store)
    missing = sorted({i for lab in labels
                      for i in (lab.article_id_a, lab.article_id_b)
                      if i not in views})
    if missing:
        raise ConfigError(
            f"labeled articles missing from artifacts: {missing[:5]}...")
    features = {}
    for lab in labels:
        key = lab.key
        if key not in features:
            features[key] = compute_pair_features(
                views[key[0]], views[key[1]], shingle_n=dcfg.shingle_n)
    model, metrics = train_classifier(labels, features, dcfg)
    Path(model_path).parent.mkdir(parents=True, exist_ok=True)
    model.save(model_path)
    click.echo(f"model saved to {model_path}")
    for split in ("full_test", "balanced_test"):
        m = metrics.get(split)
        if m is None:
            # a tiny or one-sided held-out set cannot support this summary
            click.echo(f"{split}: unavailable")
            continue
        click.echo(f"{split}: n={m['n']} f_measure="
                   f"{_fmt(m['f_measure'])} sensitivity="
                   f"{_fmt(m['sensitivity'])} auc={_fmt(m['auc'])}")


def _fmt(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.3f}"


def _scored_pairs(config: pl.RunConfig, store: pl.ArtifactStore,
                  ) -> tuple[list[tuple[str, str, float]], list[str]]:
    model_path = (config.dedup or {}).get("model_path")
    if not model_path:
        raise ConfigError("config must set dedup.model_path")
    model = TrainedClassifier.load(model_path)
    views = _views_from_artifacts(store)
    window = int((config.dedup or {}).get("blocking_window_days", 31))
    shingle_n = int((config.dedup or {}).get("shingle_n", 2))
    records = [v.record for v in views.values()]
    pairs = generate_candidate_pairs(records, window_days=window)
    features = [compute_pair_features(views[a], views[b], shingle_n=shingle_n)
                for a, b in pairs]
    scores = score_pairs(model, features) if features else []
    return ([(a, b, float(s)) for (a, b), s in zip(pairs, scores)],
            sorted(views))


@dedup.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--target-rate", required=True, type=float,
              help="Desired duplicate fraction, e.g. 0.242.")
@_exits
def calibrate(config_path: str, target_rate: float) -> None:
    """Find the score cutoff matching a target duplicate rate."""
    config, store = _load(config_path,
                          exempt=_stage_exemptions(["dedup"]))
    scored, all_ids = _scored_pairs(config, store)
    result = pl.calibrate_cutoff(scored, target_rate, all_ids=all_ids)
    if result.warning:
        click.echo(f"warning: {result.warning}", err=True)
    click.echo(f"cutoff: {result.cutoff:.6f}  "
               f"achieved_rate: {result.achieved_rate:.4f}  "
               f"target: {target_rate:.4f}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--reference", "reference_dir", default=None, type=click.Path(),
              help="Directory holding mapping.json and the reference CSVs.")
@click.option("--out", "out_path", default=None, type=click.Path())
@_exits
def link(config_path: str, reference_dir: str | None,
         out_path: str | None) -> None:
    """Match events against the reference dataset under both bounds."""
    exempt = _stage_exemptions(["link"])
    if reference_dir:
        # the override replaces the configured directory, so skip its check
        exempt = exempt | {"linkage.reference_dir"}
    config, store = _load(config_path, exempt=exempt)
    ref_dir = reference_dir or (config.linkage or {}).get("reference_dir")
    if not ref_dir:
        raise ConfigError("no reference directory configured")
    mapping = Path(ref_dir) / "mapping.json"
    if not mapping.exists():
        raise ConfigError(f"reference mapping not found: {mapping}")
    reference = load_reference(mapping, municipality_centroids())
    ours = pl.our_events_from_rows(store.read_rows("events"))
    lower = pl._criteria_from((config.linkage or {}).get("lower"), LOWER_BOUND)
    upper = pl._criteria_from((config.linkage or {}).get("upper"), UPPER_BOUND)
    report = overlap_bounds(ours, reference, lower, upper)
    if out_path is None:
        out_path = str(Path(config.output_dir) / "overlap.json")
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    Path(out_path).write_text(
        json.dumps(report.as_dict(), sort_keys=True, ensure_ascii=False,
                   indent=2) + "\n", "utf-8")
    fr = report.fractions()
    click.echo(f"ours matched: lower {report.ours_matched_lower} "
               f"({fr['ours_lower']:.1%}), upper {report.ours_matched_upper} "
               f"({fr['ours_upper']:.1%}) of {report.ours_total}")
    click.echo(f"report written to {out_path}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--spec", "specs_path", default=None, type=click.Path(),
              help="JSON list of model specs; default is the standard grid.")
@click.option("--out", "out_dir", default=None, type=click.Path())
@_exits
def regress(config_path: str, specs_path: str | None,
            out_dir: str | None) -> None:
    """Fit the fixed-effects panel models and write coefficient tables."""
    config, store = _load(config_path, exempt=_stage_exemptions(["regress"])
                          | ({"regression.specs_path"} if specs_path
                             else set()))
    if not config.regression or not config.regression.get("eradication_path"):
        raise ConfigError("config must set regression.eradication_path")
    if specs_path:
        config.regression = dict(config.regression)
        config.regression["specs_path"] = specs_path
        config.regression.pop("specs", None)
    pl.stage_regress(config, store)
    rows = store.read_rows("regress")
    out = Path(out_dir) if out_dir else Path(config.output_dir) / "tables"
    out.mkdir(parents=True, exist_ok=True)
    for row in rows:
        name = row["label"].replace(" ", "_").replace("/", "-")
        (out / f"{name}.json").write_text(
            json.dumps(row, sort_keys=True, ensure_ascii=False, indent=2)
            + "\n", "utf-8")
        if row["status"] != "ok":
            click.echo(f"{row['label']}: FAILED ({row['error']})")
            continue
        click.echo(row["label"] + ":")
        for line in row["table"]:
            click.echo(f"  {line['Variable']:<18} "
                       f"{line['Estimate']:>10.4f} "
                       f"(se {line['Std. Error']:.4f}, "
                       f"p {line['p-value']:.3f})")
    click.echo(f"tables written to {out}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--labels", "labels_path", required=True, type=click.Path())
@_exits
def evaluate(config_path: str, labels_path: str) -> None:
    """Per-field extraction accuracy against hand-labeled gold data."""
    _config, store = _load(config_path,
                           exempt=_stage_exemptions(["evaluate"]))
    records = [record_from_json(r["record"])
               for r in store.read_rows("extract") if r["status"] == "ok"]
    labels = load_labels_csv(labels_path)
    table = evaluate_extraction(records, labels)
    click.echo(f"{'field':<16} {'labeled':>8} {'correct':>8} {'accuracy':>9}")
    for fname, cell in table.items():
        acc = "n/a" if cell["accuracy"] is None else f"{cell['accuracy']:.3f}"
        click.echo(f"{fname:<16} {cell['labeled']:>8} {cell['correct']:>8} "
                   f"{acc:>9}")


if __name__ == "__main__":
    main()
