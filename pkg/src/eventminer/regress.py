"""Department x year panel construction and two-way fixed-effects OLS.

The outcome is the (transformed) event count per department-year, regressed
on its own lags, lagged eradication, and department plus year dummies. The
solve goes through a QR decomposition because the dummy block is badly
conditioned; collinear columns are detected left to right (intercept and
substantive lags get priority over dummies) and dropped by name. Standard
errors are classical sigma^2 (X'X)^-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats
from scipy.linalg import solve_triangular

from eventminer.errors import ConsistencyError, RegressionError
from eventminer.linkage import municipality_departments
from eventminer.textnorm import fold

OUTCOMES = {
    "all_events": None,  # no type filter
    "murders": "murder",
    "armed_conflict": "armed_conflict",
    "kidnappings": "kidnapping",
    "attacks": "attack_or_injury",
    "harassment": "harassment_or_threats",
}
TRANSFORMS = ("log1p", "linear", "binary")


@dataclass(frozen=True)
class EventObs:
    """Minimal view of one deduplicated event for panel building."""
    event_id: str
    department: str
    year: int
    violence_types: frozenset[str] = frozenset()


@dataclass(frozen=True)
class EradicationRow:
    municipality: str
    department: str | None
    year: int
    hectares_manual: float = 0.0
    hectares_aerial: float = 0.0

    @property
    def hectares_total(self) -> float:
        return self.hectares_manual + self.hectares_aerial


@dataclass(frozen=True)
class PanelRow:
    department: str
    year: int
    event_count: int
    hectares_manual: float
    hectares_aerial: float

    @property
    def hectares_total(self) -> float:
        return self.hectares_manual + self.hectares_aerial


@dataclass(frozen=True)
class ModelSpec:
    outcome: str = "all_events"
    lags: int = 3
    outcome_transform: str = "log1p"
    treatment_transform: str = "log1p"
    treatment_split: str = "total"  # "total" | "manual_vs_aerial"
    fixed_effects: tuple[str, ...] = ("department", "year")

    def __post_init__(self):
        if self.outcome not in OUTCOMES:
            raise ConsistencyError(f"unknown outcome {self.outcome!r}")
        if not 1 <= self.lags <= 5:
            raise ConsistencyError("lags must lie in [1, 5]")
        for t in (self.outcome_transform, self.treatment_transform):
            if t not in TRANSFORMS:
                raise ConsistencyError(f"unknown transform {t!r}")
        if self.treatment_split not in ("total", "manual_vs_aerial"):
            raise ConsistencyError("treatment_split must be total or "
                                   "manual_vs_aerial")
        if any(fe not in ("department", "year") for fe in self.fixed_effects):
            raise ConsistencyError("fixed effects limited to department, year")

    def label(self) -> str:
        split = "" if self.treatment_split == "total" else ",split"
        return (f"{self.outcome},lags={self.lags},y={self.outcome_transform},"
                f"h={self.treatment_transform}{split}")


@dataclass
class RegressionResult:
    spec: ModelSpec
    names: list[str]
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    residual_variance: float
    n: int
    df: int
    dropped_columns: list[str] = field(default_factory=list)

    def coef(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def se(self, name: str) -> float:
        return float(self.std_errors[self.names.index(name)])

    def table_rows(self, include_fe: bool = False) -> list[dict]:
        rows = []
        for i, name in enumerate(self.names):
            if not include_fe and (name.startswith("department[")
                                   or name.startswith("year[")):
                continue
            rows.append({
                "Variable": name,
                "Estimate": float(self.coefficients[i]),
                "Std. Error": float(self.std_errors[i]),
                "t-value": float(self.t_values[i]),
                "p-value": float(self.p_values[i]),
            })
        return rows

    def as_dict(self) -> dict:
        return {
            "spec": self.spec.__dict__ | {"fixed_effects":
                                          list(self.spec.fixed_effects)},
            "n": self.n, "df": self.df,
            "residual_variance": self.residual_variance,
            "dropped_columns": list(self.dropped_columns),
            "coefficients": {
                name: {"estimate": float(self.coefficients[i]),
                       "std_error": float(self.std_errors[i]),
                       "t_value": float(self.t_values[i]),
                       "p_value": float(self.p_values[i])}
                for i, name in enumerate(self.names)
            },
        }


def _transform(values: np.ndarray, how: str) -> np.ndarray:
    if how == "log1p":
        return np.log1p(values)
    if how == "linear":
        return values.astype(np.float64)
    if how == "binary":
        return (values > 0).astype(np.float64)
    raise ConsistencyError(f"unknown transform {how!r}")


def build_panel(events: list[EventObs], eradication: list[EradicationRow],
                spec: ModelSpec,
                ) -> tuple[list[PanelRow], dict]:
    """Aggregate events and hectares to department-year cells.

    Municipalities with no department of their own are mapped through the
    bundled municipality table; unmappable rows are skipped and counted.
    """
    muni_to_dept = None
    type_filter = OUTCOMES[spec.outcome]
    counts: dict[tuple[str, int], int] = {}
    departments: set[str] = set()
    years: set[int] = set()
    for ev in events:
        if type_filter is not None and type_filter not in ev.violence_types:
            departments.add(ev.department)
            years.add(ev.year)
            continue
        key = (ev.department, ev.year)
        counts[key] = counts.get(key, 0) + 1
        departments.add(ev.department)
        years.add(ev.year)

    hect: dict[tuple[str, int], tuple[float, float]] = {}
    skipped = 0
    for row in eradication:
        dept = row.department
        if not dept:
            if muni_to_dept is None:
                muni_to_dept = municipality_departments()
            dept = muni_to_dept.get(fold(row.municipality))
        if not dept:
            skipped += 1
            continue
        key = (dept, row.year)
        manual, aerial = hect.get(key, (0.0, 0.0))
        hect[key] = (manual + row.hectares_manual,
                     aerial + row.hectares_aerial)
        departments.add(dept)
        years.add(row.year)

    if not departments or not years:
        raise RegressionError("no data to build a panel from")
    year_lo, year_hi = min(years), max(years)
    panel = [
        PanelRow(department=dept, year=year,
                 event_count=counts.get((dept, year), 0),
                 hectares_manual=hect.get((dept, year), (0.0, 0.0))[0],
                 hectares_aerial=hect.get((dept, year), (0.0, 0.0))[1])
        for dept in sorted(departments)
        for year in range(year_lo, year_hi + 1)
    ]
    diagnostics = {"skipped_eradication_rows": skipped,
                   "departments": len(departments),
                   "years": year_hi - year_lo + 1}
    return panel, diagnostics


def design_from_panel(panel: list[PanelRow], spec: ModelSpec,
                      ) -> tuple[np.ndarray, np.ndarray, list[str], dict]:
    """Outcome vector, design matrix with lags and dummies, column names."""
    if not panel:
        raise RegressionError("empty panel")
    departments = sorted({r.department for r in panel})
    years = sorted({r.year for r in panel})
    index = {(r.department, r.year): r for r in panel}
    for dept in departments:
        for year in years:
            if (dept, year) not in index:
                raise ConsistencyError(
                    f"panel not balanced: missing ({dept}, {year})")

    counts = {k: float(r.event_count) for k, r in index.items()}
    usable_years = years[spec.lags:]
    if not usable_years:
        raise RegressionError("lag depth consumes the whole year range")

    rows: list[list[float]] = []
    y_list: list[float] = []
    names = ["intercept"]
    for lag in range(1, spec.lags + 1):
        names.append(f"events_lag{lag}")
        if spec.treatment_split == "total":
            names.append(f"hectares_lag{lag}")
        else:
            names.append(f"hectares_manual_lag{lag}")
            names.append(f"hectares_aerial_lag{lag}")
    fe_names: list[str] = []
    if "department" in spec.fixed_effects:
        fe_names.extend(f"department[{d}]" for d in departments[1:])
    if "year" in spec.fixed_effects:
        fe_names.extend(f"year[{y}]" for y in usable_years[1:])
    names.extend(fe_names)

    for dept in departments:
        for year in usable_years:
            row = [1.0]
            for lag in range(1, spec.lags + 1):
                row.append(float(_transform(
                    np.array(counts[(dept, year - lag)]),
                    spec.outcome_transform)))
                past = index[(dept, year - lag)]
                if spec.treatment_split == "total":
                    row.append(float(_transform(
                        np.array(past.hectares_total),
                        spec.treatment_transform)))
                else:
                    row.append(float(_transform(
                        np.array(past.hectares_manual),
                        spec.treatment_transform)))
                    row.append(float(_transform(
                        np.array(past.hectares_aerial),
                        spec.treatment_transform)))
            if "department" in spec.fixed_effects:
                row.extend(1.0 if dept == d else 0.0
                           for d in departments[1:])
            if "year" in spec.fixed_effects:
                row.extend(1.0 if year == yy else 0.0
                           for yy in usable_years[1:])
            rows.append(row)
            y_list.append(float(_transform(np.array(counts[(dept, year)]),
                                           spec.outcome_transform)))

    X = np.array(rows, dtype=np.float64)
    y = np.array(y_list, dtype=np.float64)
    info = {"rows": len(rows),
            "dropped_lag_years": len(years) - len(usable_years)}
    return y, X, names, info


def _drop_collinear(X: np.ndarray, names: list[str], tol: float = 1e-10,
                    ) -> tuple[np.ndarray, list[str], list[str]]:
    """Greedy left-to-right rank filter; earlier columns take priority."""
    n = X.shape[0]
    basis = np.zeros((n, 0))
    kept_idx: list[int] = []
    dropped: list[str] = []
    for j in range(X.shape[1]):
        col = X[:, j]
        norm = np.linalg.norm(col)
        if norm < tol:
            dropped.append(names[j])
            continue
        resid = col - basis @ (basis.T @ col)
        # second pass stabilizes near-dependent columns
        resid = resid - basis @ (basis.T @ resid)
        if np.linalg.norm(resid) <= tol * max(1.0, norm):
            dropped.append(names[j])
            continue
        basis = np.column_stack([basis, resid / np.linalg.norm(resid)])
        kept_idx.append(j)
    return X[:, kept_idx], [names[j] for j in kept_idx], dropped


def fit_ols(y: np.ndarray, X: np.ndarray, names: list[str],
            spec: ModelSpec) -> RegressionResult:
    X_kept, kept_names, dropped = _drop_collinear(X, names)
    n, p = X_kept.shape
    if n <= p:
        raise RegressionError(f"n={n} rows cannot identify p={p} columns")
    substantive = [nm for nm in kept_names if nm.startswith("hectares")]
    wanted_treatment = any(nm.startswith("hectares") for nm in names)
    if wanted_treatment and not substantive:
        raise RegressionError("all treatment columns dropped as collinear")

    q, r = np.linalg.qr(X_kept)
    qty = q.T @ y
    beta = solve_triangular(r, qty, lower=False)
    resid = y - X_kept @ beta
    df = n - p
    sigma2 = float(resid @ resid) / df
    r_inv = solve_triangular(r, np.eye(p), lower=False)
    cov = sigma2 * (r_inv @ r_inv.T)
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_vals = np.where(se > 0, beta / np.where(se > 0, se, 1.0),
                          np.where(beta == 0.0, 0.0,
                                   np.inf * np.sign(beta)))
    p_vals = 2.0 * stats.t.sf(np.abs(t_vals), df)
    return RegressionResult(
        spec=spec, names=kept_names, coefficients=beta, std_errors=se,
        t_values=t_vals, p_values=np.clip(p_vals, 0.0, 1.0),
        residual_variance=sigma2, n=n, df=df, dropped_columns=dropped)


def fit_fixed_effects(panel: list[PanelRow], spec: ModelSpec,
                      ) -> RegressionResult:
    y, X, names, _ = design_from_panel(panel, spec)
    return fit_ols(y, X, names, spec)


def robustness_grid(panel: list[PanelRow], variants: list[ModelSpec],
                    ) -> tuple[list[tuple[ModelSpec, RegressionResult | None, str | None]],
                               list[dict]]:
    """Fit every variant, isolating failures; summary flags p < 0.05 terms."""
    results: list[tuple[ModelSpec, RegressionResult | None, str | None]] = []
    summary: list[dict] = []
    for spec in variants:
        try:
            res = fit_fixed_effects(panel, spec)
        except (RegressionError, ConsistencyError) as exc:
            results.append((spec, None, str(exc)))
            summary.append({"spec": spec.label(), "status": "failed",
                            "error": str(exc)})
            continue
        results.append((spec, res, None))
        significant = [
            {"variable": row["Variable"], "estimate": row["Estimate"],
             "p_value": row["p-value"]}
            for row in res.table_rows(include_fe=False)
            if row["Variable"] != "intercept" and row["p-value"] < 0.05
        ]
        summary.append({"spec": spec.label(), "status": "ok",
                        "n": res.n, "dropped": res.dropped_columns,
                        "significant": significant})
    return results, summary


def default_grid(base: ModelSpec | None = None) -> list[ModelSpec]:
    base = base or ModelSpec()
    variants = [replace(base, lags=k) for k in range(1, 6)]
    variants.extend(replace(base, treatment_transform=t)
                    for t in ("linear", "binary"))
    variants.append(replace(base, treatment_split="manual_vs_aerial"))
    return variants


def load_eradication_csv(path) -> list[EradicationRow]:
    import csv as _csv
    rows: list[EradicationRow] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in _csv.DictReader(fh):
            def num(key: str) -> float:
                raw = (row.get(key) or "").strip()
                return float(raw) if raw else 0.0
            rows.append(EradicationRow(
                municipality=(row.get("municipality") or "").strip(),
                department=(row.get("department") or "").strip() or None,
                year=int(row["year"]),
                hectares_manual=num("hectares_manual"),
                hectares_aerial=num("hectares_aerial")))
    return rows
