"""Regenerate the committed corpus50 fixture tree.

Everything is seeded, so rerunning this script reproduces the same bytes.
The fixture exercises the full pipeline offline: fixture transports answer
the extraction and scope prompts, a bundled gazetteer answers geocoding,
and a pretrained duplicate model (fit on a larger seeded corpus) drives
the dedup stage.

Run from the repository root:  python3 tests/fixtures/build_fixtures.py
"""

from __future__ import annotations

import csv
import json
from dataclasses import replace
from pathlib import Path

import numpy as np

from eventminer.dedup.blocking import generate_candidate_pairs
from eventminer.dedup.features import DedupConfig, compute_pair_features
from eventminer.dedup.forest import train_classifier
from eventminer.dedup.synthetic import (generate_synthetic_corpus,
                                        label_candidate_pairs)
from eventminer.evaluation import violence_types
from eventminer.linkage import event_parties
from eventminer.parsing import TriState, serialize_record
from eventminer.textnorm import fold

ROOT = Path(__file__).parent / "corpus50"

SCOPE_ANSWERS = {
    "single": "This summary describes one specific event.",
    "focal": "There is one focal event and other events mentioned in passing.",
    "multi": "The summary covers multiple distinct events equally.",
}

TYPE_TO_FILE = {
    "murder": ("Asesinatos.csv", "killing"),
    "attack": ("Ataques.csv", "attack"),
    "conflict": ("Ataques.csv", "attack"),
    "kidnapping": ("Secuestros.csv", "kidnapping"),
}


def _municipality_table() -> dict[str, tuple[str, float, float]]:
    from eventminer.dedup.synthetic import _municipalities
    return {name: (dept, lat, lon)
            for name, dept, lat, lon in _municipalities()}


def build_model(out_path: Path) -> None:
    corpus = generate_synthetic_corpus(400, 100, seed=11)
    views = {a.article_id: a.view() for a in corpus}
    group_of = {a.article_id: a.group_id for a in corpus}
    pairs = generate_candidate_pairs([a.record for a in corpus])
    labels = label_candidate_pairs(pairs, group_of)
    features = {}
    for a, b in pairs:
        features[(a, b)] = compute_pair_features(views[a], views[b])
    model, metrics = train_classifier(labels, features, DedupConfig(seed=7))
    model.save(out_path)
    print(f"model: {out_path.name} "
          f"balanced f={metrics['balanced_test']['f_measure']:.3f} "
          f"sens={metrics['balanced_test']['sensitivity']:.3f}")


def main() -> None:
    ROOT.mkdir(parents=True, exist_ok=True)
    (ROOT / "responses").mkdir(exist_ok=True)
    (ROOT / "scopes").mkdir(exist_ok=True)
    (ROOT / "chm").mkdir(exist_ok=True)

    corpus = generate_synthetic_corpus(50, 8, seed=13, start_year=2011,
                                       end_year=2013)
    group_of = {a.article_id: a.group_id for a in corpus}
    group_sizes: dict[str, int] = {}
    for a in corpus:
        group_sizes[a.group_id] = group_sizes.get(a.group_id, 0) + 1
    singles = sorted(a.article_id for a in corpus
                     if group_sizes[a.group_id] == 1)

    # the filter stage needs something to drop
    a_no = set(singles[:2])          # not a single incident
    multi = set(singles[2:4])        # scope: multiple distinct events
    focal = set(singles[4:5])        # scope: focal event, retained
    dropped = a_no | multi
    retained = [a.article_id for a in corpus if a.article_id not in dropped]

    records = {}
    for a in corpus:
        record = a.record
        if a.article_id in a_no:
            record = replace(record, is_single_incident=TriState.NO)
        records[a.article_id] = record

    with open(ROOT / "corpus.jsonl", "w", encoding="utf-8") as fh:
        for a in corpus:
            fh.write(json.dumps({
                "article_id": a.article_id, "source": a.source,
                "publication_date": a.publication_date.isoformat(),
                "text": a.text, "scan_ref": f"scan/{a.article_id}.png"},
                sort_keys=True, ensure_ascii=False) + "\n")

    for a in corpus:
        (ROOT / "responses" / f"{a.article_id}.txt").write_text(
            serialize_record(records[a.article_id]), "utf-8")
        if a.article_id in multi:
            answer = SCOPE_ANSWERS["multi"]
        elif a.article_id in focal:
            answer = SCOPE_ANSWERS["focal"]
        else:
            answer = SCOPE_ANSWERS["single"]
        (ROOT / "scopes" / f"{a.article_id}.txt").write_text(answer, "utf-8")

    # two municipalities stay out of the gazetteer: their events go unlocated
    munis = _municipality_table()
    used = sorted({records[a.article_id].locations[0] for a in corpus
                   if records[a.article_id].locations})
    missing_geo = set(used[:2])
    with open(ROOT / "gazetteer.csv", "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query", "lat", "lon", "name", "department"])
        for name in sorted(munis):
            if name in missing_geo:
                continue
            dept, lat, lon = munis[name]
            writer.writerow([f"{fold(name)}, colombia", lat, lon, name, dept])

    # pair labels over the filtered articles, for `pipeline dedup train`
    filtered_records = [records[i] for i in retained]
    pairs = generate_candidate_pairs(filtered_records)
    labels = label_candidate_pairs(pairs, group_of)
    n_pos = sum(1 for lab in labels if lab.is_duplicate)
    assert 0 < n_pos < len(labels), "labels must contain both classes"
    with open(ROOT / "labels.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["article_id_a", "article_id_b", "is_duplicate",
                         "event_group_id"])
        for lab in labels:
            writer.writerow([lab.article_id_a, lab.article_id_b,
                             int(lab.is_duplicate), lab.event_group_id])
    print(f"labels: {len(labels)} pairs, {n_pos} positive")

    build_chm(corpus, records, retained, missing_geo, munis)
    build_eradication(munis)
    build_gold(retained, records)

    specs = [{"outcome": "all_events", "lags": 1},
             {"outcome": "murders", "lags": 1}]
    (ROOT / "specs.json").write_text(
        json.dumps(specs, indent=2) + "\n", "utf-8")

    run = {
        "corpus_path": "corpus.jsonl",
        "output_dir": "out",
        "transport": {"kind": "fixture", "root": "responses"},
        "scope_transport": {"kind": "fixture", "root": "scopes"},
        "geocoder": {"kind": "fixture", "path": "gazetteer.csv"},
        "dedup": {"model_path": "model.json", "cutoff": 0.7,
                  "shingle_n": 2, "blocking_window_days": 31, "seed": 7},
        "linkage": {"reference_dir": "chm"},
        "regression": {"eradication_path": "eradication.csv",
                       "specs_path": "specs.json"},
        "seed": 7,
        "max_in_flight": 2,
    }
    (ROOT / "run.json").write_text(json.dumps(run, indent=2) + "\n", "utf-8")

    build_model(ROOT / "model.json")
    print(f"fixture written to {ROOT}")


def build_chm(corpus, records, retained, missing_geo, munis) -> None:
    """A small reference dataset overlapping a handful of fixture events."""
    chosen = []
    seen_groups = set()
    for a in corpus:
        record = records[a.article_id]
        if a.article_id not in retained or a.group_id in seen_groups:
            continue
        if not record.locations or record.locations[0] in missing_geo:
            continue
        types = violence_types(record)
        for key in ("murder", "attack_or_injury", "armed_conflict",
                    "kidnapping"):
            short = {"murder": "murder", "attack_or_injury": "attack",
                     "armed_conflict": "conflict",
                     "kidnapping": "kidnapping"}[key]
            if key in types and short in TYPE_TO_FILE:
                chosen.append((a, record, short))
                seen_groups.add(a.group_id)
                break
        if len(chosen) >= 5:
            break

    rows_by_file: dict[str, list[list]] = {}
    partial_done = False
    for i, (a, record, short) in enumerate(chosen):
        fname, _vtype = TYPE_TO_FILE[short]
        muni = record.locations[0]
        dept, lat, lon = munis[muni]
        parties = sorted(event_parties(record))
        if not partial_done and len(parties) > 1:
            # partial party list: reachable by the loose rule only, so the
            # fixture separates the two bounds
            parties = parties[:1]
            partial_done = True
        rows_by_file.setdefault(fname, []).append([
            f"chm{i:03d}", a.event_date.isoformat(), muni, dept,
            "|".join(parties), lat, lon, record.victim_count or ""])

    # decoys that should match nothing: wrong years, unrelated parties
    rows_by_file.setdefault("Asesinatos.csv", []).append(
        ["chm900", "2005-03-12", "Leticia", "Amazonas", "farc", "", "", 3])
    rows_by_file.setdefault("Secuestros.csv", []).append(
        ["chm901", "2005-07-01", "Mitu", "Vaupes", "eln", "", "", 1])

    header = ["ref_id", "date", "municipality", "department", "parties",
              "lat", "lon", "victim_count"]
    mapping = {"files": []}
    for fname in ("Asesinatos.csv", "Ataques.csv", "Secuestros.csv",
                  "CivilMuertos.csv", "Terroristas.csv"):
        rows = rows_by_file.get(fname, [])
        with open(ROOT / "chm" / fname, "w", newline="",
                  encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        vtype = {"Asesinatos.csv": "killing", "Ataques.csv": "attack",
                 "Secuestros.csv": "kidnapping",
                 "CivilMuertos.csv": "death",
                 "Terroristas.csv": "terrorist_attack"}[fname]
        mapping["files"].append({
            "path": fname, "violence_type": vtype,
            "columns": {c: c for c in header}, "party_separator": "|"})
    (ROOT / "chm" / "mapping.json").write_text(
        json.dumps(mapping, indent=2) + "\n", "utf-8")
    print(f"chm: {sum(len(r) for r in rows_by_file.values())} reference rows")


def build_eradication(munis) -> None:
    rng = np.random.default_rng(5)
    with open(ROOT / "eradication.csv", "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["municipality", "department", "year",
                         "hectares_manual", "hectares_aerial"])
        for name in sorted(munis):
            dept, _lat, _lon = munis[name]
            for year in (2011, 2012, 2013):
                writer.writerow([
                    name, dept, year,
                    round(float(rng.uniform(0, 400)), 1),
                    round(float(rng.uniform(0, 700)), 1)])


def build_gold(retained, records) -> None:
    """Ten labels per field; the first one per field is deliberately wrong,
    so each accuracy is exactly 0.9."""
    ids = sorted(retained)[:10]
    rows = []
    for field in ("victim_count", "location", "attacker_group",
                  "victim_type", "violence_type", "any_violence"):
        for i, article_id in enumerate(ids):
            record = records[article_id]
            if field == "victim_count":
                value = ("" if record.victim_count is None
                         else str(record.victim_count))
                if i == 0:
                    value = str((record.victim_count or 0) + 7)
            elif field == "location":
                value = record.locations[0] if record.locations else ""
                if i == 0:
                    value = "Villa Imaginaria"
            elif field == "attacker_group":
                value = ",".join(record.attackers)
                if i == 0:
                    value = "los marcianos"
            elif field == "victim_type":
                value = ",".join(record.victim_types)
                if i == 0:
                    value = "astronautas"
            elif field == "violence_type":
                value = ",".join(sorted(violence_types(record)))
                if i == 0:
                    actual = violence_types(record)
                    value = "kidnapping" if "kidnapping" not in actual \
                        else "murder"
            else:  # any_violence
                actual = "yes" if violence_types(record) else "no"
                value = actual if i > 0 else \
                    ("no" if actual == "yes" else "yes")
            rows.append([article_id, field, value])
    with open(ROOT / "gold.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["article_id", "field", "value"])
        writer.writerows(rows)


if __name__ == "__main__":
    main()
