"""Seeded random-forest classifier for duplicate pairs.

Grown from scratch so the trees can split three ways (<=, >, missing) and
treat the distance column's NaNs as their own branch instead of imputing.
100 trees on bootstrap resamples, unlimited depth, Gini impurity, sqrt(p)
candidate columns per split. Everything is derived from the master seed:
group split, downsampling, per-tree bootstrap and column draws, so one seed
plus one label set reproduces the serialized model byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from eventminer import kernels
from eventminer.dedup.features import (COLUMN_TO_BASE, DESIGN_COLUMNS,
                                       BASE_FEATURES, DedupConfig,
                                       PairFeatures, features_matrix)
from eventminer.errors import ConsistencyError, SchemaMismatch, TrainingError

PairKey = tuple[str, str]


def pair_key(a: str, b: str) -> PairKey:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class PairLabel:
    article_id_a: str
    article_id_b: str
    is_duplicate: bool
    event_group_id: str = ""

    @property
    def key(self) -> PairKey:
        return pair_key(self.article_id_a, self.article_id_b)


def load_pair_labels(path: str | Path) -> list[PairLabel]:
    """Labels CSV: article_id_a, article_id_b, is_duplicate, event_group_id."""
    import csv

    labels: list[PairLabel] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            flag = (row.get("is_duplicate") or "").strip().lower()
            labels.append(PairLabel(
                article_id_a=row["article_id_a"].strip(),
                article_id_b=row["article_id_b"].strip(),
                is_duplicate=flag in ("1", "true", "yes"),
                event_group_id=(row.get("event_group_id") or "").strip()))
    return labels


class _Tree:
    __slots__ = ("feature", "threshold", "left", "right", "missing", "value")

    def __init__(self, feature, threshold, left, right, missing, value):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.missing = missing
        self.value = value


def _gini(pos: float, n: float) -> float:
    if n == 0:
        return 0.0
    p = pos / n
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def _grow_tree(X: np.ndarray, y: np.ndarray, rng: np.random.Generator,
               mtry: int, importance_acc: np.ndarray) -> _Tree:
    n_total = X.shape[0]
    n_cols = X.shape[1]
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    missing: list[int] = []
    value: list[float] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        missing.append(-1)
        value.append(0.0)
        return len(feature) - 1

    # (index array, node id); children are pushed right-then-left so the
    # left branch builds first and RNG consumption order is fixed.
    root = new_node()
    stack: list[tuple[np.ndarray, int]] = [(np.arange(n_total), root)]
    while stack:
        idx, node = stack.pop()
        ynode = y[idx]
        n_node = idx.size
        pos_node = int(ynode.sum())
        value[node] = pos_node / n_node
        if pos_node == 0 or pos_node == n_node or n_node < 2:
            continue
        gini_node = _gini(pos_node, n_node)

        candidates = rng.choice(n_cols, size=min(mtry, n_cols), replace=False)
        best_impurity = math.inf
        best: tuple[int, float, np.ndarray, np.ndarray, np.ndarray] | None = None
        for f in candidates:
            col = X[idx, f]
            miss_mask = np.isnan(col)
            nm = int(miss_mask.sum())
            vals = col[~miss_mask]
            m = vals.size
            if m < 2:
                continue
            order = np.argsort(vals, kind="stable")
            sv = vals[order]
            if sv[0] == sv[-1]:
                continue
            sy = ynode[~miss_mask][order].astype(np.float64)
            pos_present = float(sy.sum())
            pos_miss = pos_node - pos_present
            gini_m_term = 0.0
            if nm:
                gini_m_term = nm * _gini(pos_miss, nm)

            t = np.arange(1, m)
            csum = np.cumsum(sy)
            nl = t.astype(np.float64)
            nr = m - nl
            pl = csum[:-1]
            pr = pos_present - pl
            gini_l = 1.0 - (pl / nl) ** 2 - ((nl - pl) / nl) ** 2
            gini_r = 1.0 - (pr / nr) ** 2 - ((nr - pr) / nr) ** 2
            weighted = (nl * gini_l + nr * gini_r + gini_m_term) / n_node
            weighted[sv[1:] <= sv[:-1]] = math.inf
            j = int(np.argmin(weighted))
            if weighted[j] < best_impurity - 1e-12:
                thr = sv[j] + (sv[j + 1] - sv[j]) / 2.0
                if thr >= sv[j + 1]:
                    thr = float(sv[j])
                best_impurity = float(weighted[j])
                best = (int(f), float(thr), miss_mask, col, None)

        if best is None or gini_node - best_impurity <= 1e-12:
            continue
        f, thr, miss_mask, col, _ = best
        gain = gini_node - best_impurity
        importance_acc[f] += (n_node / n_total) * gain

        left_mask = ~miss_mask & (col <= thr)
        right_mask = ~miss_mask & (col > thr)
        idx_left, idx_right, idx_miss = idx[left_mask], idx[right_mask], idx[miss_mask]

        feature[node] = f
        threshold[node] = thr
        node_left, node_right = new_node(), new_node()
        left[node], right[node] = node_left, node_right
        if idx_miss.size:
            node_miss = new_node()
            missing[node] = node_miss
            stack.append((idx_miss, node_miss))
        else:
            # untrained missing branch falls back to the larger child
            missing[node] = node_left if idx_left.size >= idx_right.size else node_right
        stack.append((idx_right, node_right))
        stack.append((idx_left, node_left))

    return _Tree(np.array(feature, dtype=np.int64),
                 np.array(threshold, dtype=np.float64),
                 np.array(left, dtype=np.int64),
                 np.array(right, dtype=np.int64),
                 np.array(missing, dtype=np.int64),
                 np.array(value, dtype=np.float64))


class TrainedClassifier:
    """Forest plus schema, importances, and provenance metadata."""

    def __init__(self, trees: list[_Tree], columns: list[str],
                 importances: dict[str, float], seed: int,
                 config_digest: str, training_digest: str,
                 metrics: dict | None = None):
        self.trees = trees
        self.columns = columns
        self.feature_importances = importances
        self.seed = seed
        self.config_digest = config_digest
        self.training_digest = training_digest
        self.metrics = metrics or {}
        self._flat = None

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def _flatten(self):
        if self._flat is None:
            roots, offset = [], 0
            parts = {k: [] for k in ("feature", "threshold", "left", "right",
                                     "missing", "value")}
            for tree in self.trees:
                roots.append(offset)
                n = tree.feature.size
                parts["feature"].append(tree.feature)
                parts["threshold"].append(tree.threshold)
                parts["value"].append(tree.value)
                for k in ("left", "right", "missing"):
                    arr = getattr(tree, k).copy()
                    shifted = np.where(arr >= 0, arr + offset, arr)
                    parts[k].append(shifted)
                offset += n
            # the kernels take int32 node indices; tree sizes are nowhere
            # near that limit
            self._flat = {}
            for k, v in parts.items():
                arr = np.concatenate(v)
                if k in ("feature", "left", "right", "missing"):
                    arr = arr.astype(np.int32)
                self._flat[k] = np.ascontiguousarray(arr)
            self._flat["roots"] = np.array(roots, dtype=np.int32)
        return self._flat

    def to_json(self) -> dict:
        return {
            "format": "eventminer-forest/1",
            "schema": {"columns": self.columns, "base_features": BASE_FEATURES},
            "seed": self.seed,
            "config_digest": self.config_digest,
            "training_digest": self.training_digest,
            "n_trees": self.n_trees,
            "importances": self.feature_importances,
            "metrics": self.metrics,
            "trees": [
                {"feature": t.feature.tolist(),
                 "threshold": t.threshold.tolist(),
                 "left": t.left.tolist(),
                 "right": t.right.tolist(),
                 "missing": t.missing.tolist(),
                 "value": t.value.tolist()}
                for t in self.trees
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "TrainedClassifier":
        if data.get("format") != "eventminer-forest/1":
            raise SchemaMismatch("not a serialized forest document")
        trees = [
            _Tree(np.array(t["feature"], dtype=np.int64),
                  np.array(t["threshold"], dtype=np.float64),
                  np.array(t["left"], dtype=np.int64),
                  np.array(t["right"], dtype=np.int64),
                  np.array(t["missing"], dtype=np.int64),
                  np.array(t["value"], dtype=np.float64))
            for t in data["trees"]
        ]
        return cls(trees, list(data["schema"]["columns"]),
                   dict(data["importances"]), int(data["seed"]),
                   data["config_digest"], data["training_digest"],
                   data.get("metrics"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json(), ensure_ascii=False, sort_keys=True),
            encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TrainedClassifier":
        return cls.from_json(json.loads(Path(path).read_text("utf-8")))


def score_matrix(model: TrainedClassifier, X: np.ndarray) -> np.ndarray:
    if X.shape[1] != len(model.columns):
        raise SchemaMismatch(
            f"model expects {len(model.columns)} columns, got {X.shape[1]}")
    if model.columns != DESIGN_COLUMNS:
        raise SchemaMismatch("model schema does not match this code's columns")
    flat = model._flatten()
    return kernels.forest_scores(
        np.ascontiguousarray(X, dtype=np.float64), flat["feature"],
        flat["threshold"], flat["left"], flat["right"], flat["missing"],
        flat["value"], flat["roots"])


def score_pairs(model: TrainedClassifier,
                features: list[PairFeatures]) -> np.ndarray:
    return score_matrix(model, features_matrix(features))


def score_pair(model: TrainedClassifier, f: PairFeatures) -> float:
    return float(score_pairs(model, [f])[0])


def _groups_of_articles(labels: list[PairLabel]) -> dict[str, str]:
    """Event-group key per article: positive labels define groups, anything
    else is its own singleton."""
    groups: dict[str, str] = {}
    for lab in labels:
        if not lab.is_duplicate:
            continue
        gid = lab.event_group_id or f"pair:{lab.key[0]}:{lab.key[1]}"
        for art in lab.key:
            prior = groups.get(art)
            if prior is not None and prior != gid:
                raise ConsistencyError(
                    f"article {art!r} labeled into two event groups "
                    f"({prior!r}, {gid!r})")
            groups[art] = gid
    for lab in labels:
        for art in lab.key:
            groups.setdefault(art, f"single:{art}")
    return groups


def _auc(scores: np.ndarray, y: np.ndarray) -> float | None:
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(scores)
    return float((ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0)
                 / (n_pos * n_neg))


def _classification_metrics(scores: np.ndarray, y: np.ndarray) -> dict:
    pred = scores >= 0.5
    tp = int(np.sum(pred & (y == 1)))
    tn = int(np.sum(~pred & (y == 0)))
    fp = int(np.sum(pred & (y == 0)))
    fn = int(np.sum(~pred & (y == 1)))
    n = y.size
    sens = tp / (tp + fn) if tp + fn else None
    spec = tn / (tn + fp) if tn + fp else None
    prec = tp / (tp + fp) if tp + fp else None
    f1 = None
    if prec is not None and sens is not None and prec + sens > 0:
        f1 = 2 * prec * sens / (prec + sens)
    return {
        "n": n, "accuracy": (tp + tn) / n if n else None,
        "sensitivity": sens, "specificity": spec, "precision": prec,
        "f_measure": f1, "auc": _auc(scores, y),
    }


def train_classifier(labels: list[PairLabel],
                     features: dict[PairKey, PairFeatures],
                     config: DedupConfig,
                     ) -> tuple[TrainedClassifier, dict]:
    """Fit the forest on labeled pairs with a group-wise 80/20 split.

    Pairs whose endpoints fall in different split halves are dropped so no
    event group spans train and test. Training negatives are downsampled to
    the positive count; test metrics are reported on the full held-out set
    and on a balanced subsample of it.
    """
    if not labels:
        raise TrainingError("no labels supplied")
    seen = set()
    uniq: list[PairLabel] = []
    for lab in labels:
        if lab.key in seen:
            continue
        seen.add(lab.key)
        uniq.append(lab)
        if lab.key not in features:
            raise ConsistencyError(f"no features for labeled pair {lab.key}")
    classes = {lab.is_duplicate for lab in uniq}
    if len(classes) < 2:
        raise TrainingError("labels contain a single class; cannot train")

    groups = _groups_of_articles(uniq)
    group_keys = sorted(set(groups.values()))
    if len(group_keys) < 2:
        raise TrainingError("need at least two event groups for a group split")

    master = np.random.SeedSequence(config.seed)
    ss_split, ss_forest, ss_train_down, ss_test_down = master.spawn(4)
    rng_split = np.random.default_rng(ss_split)
    perm = rng_split.permutation(len(group_keys))
    n_test = max(1, int(round(0.2 * len(group_keys))))
    test_groups = {group_keys[i] for i in perm[:n_test]}

    uniq.sort(key=lambda lab: lab.key)
    train_labels, test_labels = [], []
    for lab in uniq:
        ga, gb = groups[lab.key[0]], groups[lab.key[1]]
        in_test = (ga in test_groups, gb in test_groups)
        if all(in_test):
            test_labels.append(lab)
        elif not any(in_test):
            train_labels.append(lab)
        # pairs straddling the split are discarded

    y_train = np.array([lab.is_duplicate for lab in train_labels], dtype=np.int64)
    if y_train.size == 0 or len(set(y_train.tolist())) < 2:
        raise TrainingError("training split does not contain both classes")

    pos_idx = np.flatnonzero(y_train == 1)
    neg_idx = np.flatnonzero(y_train == 0)
    kept = np.arange(y_train.size)
    if config.downsample_negatives and neg_idx.size > pos_idx.size:
        rng_down = np.random.default_rng(ss_train_down)
        sampled = rng_down.choice(neg_idx, size=pos_idx.size, replace=False)
        kept = np.sort(np.concatenate([pos_idx, sampled]))
    train_kept = [train_labels[i] for i in kept]

    X_train = features_matrix([features[lab.key] for lab in train_kept])
    y_fit = np.array([lab.is_duplicate for lab in train_kept], dtype=np.int64)

    digest_payload = json.dumps(
        [[lab.key[0], lab.key[1], lab.is_duplicate, lab.event_group_id,
          features[lab.key].as_dict()] for lab in uniq],
        sort_keys=True, ensure_ascii=False)
    training_digest = hashlib.sha256(digest_payload.encode()).hexdigest()[:16]

    mtry = max(1, int(math.sqrt(len(DESIGN_COLUMNS))))
    importance_acc = np.zeros(len(DESIGN_COLUMNS), dtype=np.float64)
    tree_seeds = ss_forest.spawn(config.forest_trees)
    trees = []
    n = X_train.shape[0]
    for t in range(config.forest_trees):
        rng = np.random.default_rng(tree_seeds[t])
        boot = rng.integers(0, n, size=n)
        trees.append(_grow_tree(X_train[boot], y_fit[boot], rng, mtry,
                                importance_acc))

    base_acc: dict[str, float] = {name: 0.0 for name in BASE_FEATURES}
    for col, val in zip(DESIGN_COLUMNS, importance_acc):
        base_acc[COLUMN_TO_BASE[col]] += float(val)
    total = sum(base_acc.values())
    if total > 0:
        importances = {k: v / total for k, v in base_acc.items()}
    else:
        importances = {k: 1.0 / len(BASE_FEATURES) for k in base_acc}

    model = TrainedClassifier(trees, list(DESIGN_COLUMNS), importances,
                              config.seed, config.digest(), training_digest)

    metrics: dict = {
        "train": {
            "pairs": len(train_labels), "used": len(train_kept),
            "positives": int(pos_idx.size), "negatives": int(neg_idx.size),
        },
        "test": {"pairs": len(test_labels)},
        "dropped_straddling": len(uniq) - len(train_labels) - len(test_labels),
    }
    if test_labels:
        X_test = features_matrix([features[lab.key] for lab in test_labels])
        y_test = np.array([lab.is_duplicate for lab in test_labels],
                          dtype=np.int64)
        scores = score_matrix(model, X_test)
        metrics["full_test"] = _classification_metrics(scores, y_test)
        t_pos = np.flatnonzero(y_test == 1)
        t_neg = np.flatnonzero(y_test == 0)
        if t_pos.size and t_neg.size:
            rng_bal = np.random.default_rng(ss_test_down)
            if t_neg.size > t_pos.size:
                t_neg = np.sort(rng_bal.choice(t_neg, size=t_pos.size,
                                               replace=False))
            bal = np.sort(np.concatenate([t_pos, t_neg]))
            metrics["balanced_test"] = _classification_metrics(
                scores[bal], y_test[bal])
    model.metrics = metrics
    return model, metrics
