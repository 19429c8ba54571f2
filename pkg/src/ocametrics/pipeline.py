"""End-to-end orchestration: per-country estimation, group analytics, reports.

``run_pipeline`` drives the whole flow for a panel: unit-root pretests on
log levels, cointegration pretests, lag selection with a diagnostics gate,
VAR estimation with optional break dummies, long-run identification,
impulse-response summaries, then the cross-country layer (correlations,
symmetry groups, dispersion with its trend, cost of inclusion).

Everything is computed before anything is written, so a failing stage
leaves no partial output.  Reports are deterministic: same configuration
and inputs produce byte-identical ``report.json`` regardless of the thread
count used for the per-country stage.
"""

from __future__ import annotations

import concurrent.futures
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from . import _kernels
from .cointegration import JohansenResult, johansen_test
from .errors import ConfigError, DateRangeError, OcaError
from .identification import IrfSet, SizeSpeed, StructuralModel, identify_bq, irf_structural, size_and_speed
from .metrics import (
    CorrelationReport,
    SymmetryReport,
    WeightTable,
    classify_symmetry,
    correlation_matrix,
    cost_of_inclusion,
    dispersion_index,
    hp_filter,
    load_weights,
    significance_stars,
    trend_change,
)
from .months import Month
from .panel import Panel, load_panel, log_level_series, transform_pair
from .unit_root import AdfResult, adf_test
from .var import (
    ArchLmResult,
    DummySpec,
    LagSelection,
    PortmanteauResult,
    StabilityResult,
    VarModel,
    arch_lm_test,
    fit_var,
    portmanteau_test,
    select_lag,
    stability,
)

SHOCK_KINDS = ("supply", "demand")
VARIABLES = ("activity", "price")


@dataclass(frozen=True)
class PipelineConfig:
    panel_path: str
    weights_path: str
    output_dir: str
    base_year: int = 2010
    alpha: float = 0.05
    max_lags: int = 12
    hp_lambda: float = 14400.0
    irf_horizon: int = 48
    seed: int = 0
    seasonal_adjust: bool = False
    snapshot_dates: tuple[Month, ...] = ()
    dummies: tuple[tuple[str, DummySpec], ...] = ()
    portmanteau_h: int = 12
    arch_q: int = 4
    threads: int = 1

    def validate(self) -> None:
        if not self.panel_path:
            raise ConfigError("panel path must be set")
        if not self.weights_path:
            raise ConfigError("weights path must be set")
        if not self.output_dir:
            raise ConfigError("output directory must be set")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if not 1 <= self.max_lags <= 24:
            raise ConfigError(f"max_lags must be in [1, 24], got {self.max_lags}")
        if self.hp_lambda < 0:
            raise ConfigError("hp_lambda must be >= 0")
        if self.irf_horizon < 12:
            raise ConfigError("irf_horizon must be >= 12")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.portmanteau_h < 2:
            raise ConfigError("portmanteau_h must be >= 2")
        if self.arch_q < 1:
            raise ConfigError("arch_q must be >= 1")


@dataclass(frozen=True)
class CountryAnalysis:
    country: str
    adf: Mapping[str, Mapping[str, AdfResult]]
    conclusions: Mapping[str, str]
    johansen: JohansenResult
    lag_selection: LagSelection
    model: VarModel
    stability: StabilityResult
    portmanteau: PortmanteauResult
    portmanteau_h: int
    arch: Mapping[str, ArchLmResult]
    svar: StructuralModel
    irf: IrfSet
    size_speed: SizeSpeed


@dataclass(frozen=True)
class PipelineResult:
    report: dict
    output_dir: Path
    files: tuple[str, ...]

    @property
    def report_path(self) -> Path:
        return self.output_dir / "report.json"


def _integration_conclusion(level: AdfResult, diff: AdfResult, series) -> str:
    if level.reject_at is not None and level.reject_at <= 0.05:
        return "I(0)"
    if diff.reject_at is not None and diff.reject_at <= 0.05:
        return "I(1)"
    try:
        second = adf_test(np.diff(np.diff(series)), spec=level.spec)
        if second.reject_at is not None and second.reject_at <= 0.05:
            return "I(2)"
    except OcaError:
        pass
    return "inconclusive"


def analyze_country(panel: Panel, country: str, config: PipelineConfig) -> CountryAnalysis:
    """Run the full single-country estimation chain."""
    dummies = tuple(spec for c, spec in config.dummies if c == country)
    adf: dict[str, dict[str, AdfResult]] = {}
    conclusions: dict[str, str] = {}
    for variable in VARIABLES:
        logs = log_level_series(panel, country, variable, base_year=config.base_year,
                                seasonal=config.seasonal_adjust)
        level = adf_test(logs, spec="trend", max_lags=config.max_lags)
        diff = adf_test(np.diff(logs), spec="trend", max_lags=config.max_lags)
        adf[variable] = {"level": level, "first_difference": diff}
        conclusions[variable] = _integration_conclusion(level, diff, logs)

    data = transform_pair(panel, country, base_year=config.base_year,
                          seasonal=config.seasonal_adjust)
    selection = select_lag(data, max_p=config.max_lags, diagnostics_gate=True,
                           dummies=dummies, portmanteau_h=config.portmanteau_h,
                           arch_q=config.arch_q, alpha=config.alpha)
    model = fit_var(data, selection.p, dummies)
    stab = stability(model)
    h_eff = max(config.portmanteau_h, model.p + 1)
    port = portmanteau_test(model, h_eff)
    arch = {variable: arch_lm_test(model.residuals[:, i], config.arch_q)
            for i, variable in enumerate(VARIABLES)}

    pair_logs = tuple(
        log_level_series(panel, country, variable, base_year=config.base_year,
                         seasonal=config.seasonal_adjust)
        for variable in VARIABLES)
    johansen = johansen_test(pair_logs, lag_order=selection.p + 1)

    svar = identify_bq(model)
    irf = irf_structural(svar, model, config.irf_horizon)
    sizespeed = size_and_speed(irf)
    return CountryAnalysis(country=country, adf=adf, conclusions=conclusions,
                           johansen=johansen, lag_selection=selection, model=model,
                           stability=stab, portmanteau=port, portmanteau_h=h_eff,
                           arch=arch, svar=svar, irf=irf, size_speed=sizespeed)


class StageError(OcaError):
    """Wraps a failure with the country/stage that produced it."""

    def __init__(self, stage: str, original: Exception):
        super().__init__(f"[{stage}] {original}")
        self.stage = stage
        self.original = original


def _analyze_all(panel: Panel, config: PipelineConfig) -> dict[str, CountryAnalysis]:
    def work(country: str) -> CountryAnalysis:
        try:
            return analyze_country(panel, country, config)
        except OcaError as exc:
            raise StageError(f"country {country}", exc) from exc

    if config.threads == 1:
        return {c: work(c) for c in panel.countries}
    with concurrent.futures.ThreadPoolExecutor(max_workers=config.threads) as pool:
        futures = {c: pool.submit(work, c) for c in panel.countries}
        return {c: futures[c].result() for c in panel.countries}


def _common_shocks(results: Mapping[str, CountryAnalysis]):
    start = max(r.svar.dates[0] for r in results.values())
    end = min(r.svar.dates[-1] for r in results.values())
    if end < start:
        raise DateRangeError("countries share no common shock calendar")
    n = end - start + 1
    dates = tuple(Month.from_index(start.index + i) for i in range(n))
    shocks = {kind: {} for kind in SHOCK_KINDS}
    for country, result in results.items():
        offset = start - result.svar.dates[0]
        for k_idx, kind in enumerate(SHOCK_KINDS):
            shocks[kind][country] = result.svar.shocks[offset:offset + n, k_idx]
    return dates, shocks


def _adf_dict(result: AdfResult) -> dict:
    out = result.as_dict()
    out["stars"] = significance_stars_from_reject(result.reject_at)
    return out


def significance_stars_from_reject(reject_at: float | None) -> str:
    if reject_at is None:
        return ""
    return {0.01: "***", 0.05: "**", 0.10: "*"}[reject_at]


def _matrix(a: np.ndarray) -> list:
    return [[float(v) for v in row] for row in np.asarray(a)]


def _country_report(result: CountryAnalysis) -> dict:
    model = result.model
    return {
        "adf": {
            variable: {
                "level": _adf_dict(result.adf[variable]["level"]),
                "first_difference": _adf_dict(result.adf[variable]["first_difference"]),
                "conclusion": result.conclusions[variable],
            } for variable in VARIABLES
        },
        "johansen": result.johansen.as_dict(),
        "var": {
            "p": model.p,
            "criterion_choices": dict(result.lag_selection.criterion_choices),
            "gate_trail": [
                {"p": a.p, "stable": a.stable, "max_modulus": a.max_modulus,
                 "portmanteau_h": a.portmanteau_h,
                 "portmanteau_pvalue": a.portmanteau_pvalue,
                 "arch_pvalues": list(a.arch_pvalues), "passed": a.passed}
                for a in result.lag_selection.trail
            ],
            "intercept": [float(v) for v in model.intercept],
            "coefs": [_matrix(b) for b in model.coefs],
            "sigma": _matrix(model.sigma),
            "dummies": [d.label() for d in model.dummies],
            "exog_coefficients": _matrix(model.exog_coefficients),
            "stable": result.stability.stable,
            "max_modulus": float(result.stability.max_modulus),
            "moduli": [float(m) for m in result.stability.moduli],
            "portmanteau": {
                "h": result.portmanteau_h,
                "statistic": result.portmanteau.statistic,
                "df": result.portmanteau.df,
                "p_value": result.portmanteau.p_value,
            },
            "arch": {
                variable: {
                    "q": result.arch[variable].df,
                    "statistic": result.arch[variable].statistic,
                    "p_value": result.arch[variable].p_value,
                } for variable in VARIABLES
            },
        },
        "identification": {
            "a0": _matrix(result.svar.a0),
            "long_run": _matrix(result.svar.long_run),
            "n_shocks": int(result.svar.shocks.shape[0]),
            "first_shock_date": str(result.svar.dates[0]),
            "last_shock_date": str(result.svar.dates[-1]),
        },
        "irf": {
            "horizon": result.irf.horizon,
            "cumulative_responses": {
                f"{shock}_{variable}": [float(v) for v in series]
                for (shock, variable), series in sorted(result.irf.responses.items())
            },
            "long_run": {
                f"{shock}_{variable}": value
                for (shock, variable), value in sorted(result.irf.long_run.items())
            },
        },
        "size_speed": {
            "supply_size": result.size_speed.supply_size,
            "supply_speed": result.size_speed.supply_speed,
            "demand_size": result.size_speed.demand_size,
            "demand_speed": result.size_speed.demand_speed,
        },
    }


def _conventions() -> dict:
    return {
        "backend": _kernels.BACKEND,
        "transform_order": "rebase -> log -> optional seasonal dummy adjustment -> first difference",
        "rebase": "arithmetic base-year mean rescaled to 100",
        "adf_lag_rule": "aic over 0..max_lags",
        "adf_critical_values": "response surface in the effective sample size",
        "adf_spec": "linear trend for level and first-difference pretests",
        "johansen_deterministics": "unrestricted constant, trend restricted to the cointegrating relation",
        "johansen_rejection_rule": "reject iff statistic > 5% critical value",
        "johansen_lag_rule": "levels order = selected difference-VAR order + 1",
        "sigma_divisor": "residual row count (T - p)",
        "lag_selection": "minimum of AIC/SC/HQ picks, incremented until stability and 5% diagnostics pass",
        "dummy_default": "step form, both equations",
        "sign_normalization": "long-run diagonal positive",
        "long_run_values": "closed form from the coefficient sum, not truncated sums",
        "significance_stars": "* p<0.10, ** p<0.05, *** p<0.01",
        "table_rounding": "half-to-even, 3 decimals",
        "hp_lambda_convention": "14400 for monthly data",
        "shock_csv_precision": "15 significant digits",
    }


def build_report(panel: Panel, weights: WeightTable, config: PipelineConfig) -> dict:
    """Compute every number in the bundle; pure and deterministic."""
    results = _analyze_all(panel, config)
    dates, shocks = _common_shocks(results)

    correlations: dict[str, CorrelationReport] = {}
    symmetry: dict[str, SymmetryReport] = {}
    dispersion: dict[str, dict] = {}
    cost: dict[str, dict] = {}
    for kind in SHOCK_KINDS:
        try:
            report = correlation_matrix(shocks[kind], kind=kind)
            correlations[kind] = report
            symmetry[kind] = classify_symmetry(report, config.alpha)
            disp = dispersion_index(shocks[kind], dates, weights, kind=kind)
            trend, _cycle = hp_filter(disp.values, config.hp_lambda)
            dispersion[kind] = {
                "values": disp.values,
                "trend": trend,
                "trend_change_pct": trend_change(dates, trend, dates[0], dates[-1]),
            }
            cost[kind] = {
                country: cost_of_inclusion(shocks[kind], dates, weights, country, kind=kind)
                for country in panel.countries
            }
        except OcaError as exc:
            raise StageError(f"group {kind}", exc) from exc

    snapshots: dict[str, dict[str, dict[str, float]]] = {}
    if config.snapshot_dates:
        index = {d: i for i, d in enumerate(dates)}
        for snap in config.snapshot_dates:
            if snap not in index:
                raise StageError(
                    "group snapshots",
                    DateRangeError(f"snapshot {snap} outside common calendar "
                                   f"{dates[0]}..{dates[-1]}"))
        for kind in SHOCK_KINDS:
            snapshots[kind] = {
                country: {str(s): float(cost[kind][country].values[index[s]])
                          for s in config.snapshot_dates}
                for country in panel.countries
            }

    sizes = {c: results[c].size_speed for c in panel.countries}
    averages = {
        "supply_size": float(np.mean([s.supply_size for s in sizes.values()])),
        "supply_speed": float(np.mean([s.supply_speed for s in sizes.values()])),
        "demand_size": float(np.mean([s.demand_size for s in sizes.values()])),
        "demand_speed": float(np.mean([s.demand_speed for s in sizes.values()])),
    }

    report = {
        "metadata": {
            "config": {
                "panel_path": config.panel_path,
                "weights_path": config.weights_path,
                "output_dir": config.output_dir,
                "base_year": config.base_year,
                "alpha": config.alpha,
                "max_lags": config.max_lags,
                "hp_lambda": config.hp_lambda,
                "irf_horizon": config.irf_horizon,
                "seed": config.seed,
                "seasonal_adjust": config.seasonal_adjust,
                "snapshot_dates": [str(d) for d in config.snapshot_dates],
                "dummies": [f"{c}:{spec.label()}" for c, spec in config.dummies],
                "portmanteau_h": config.portmanteau_h,
                "arch_q": config.arch_q,
            },
            "conventions": _conventions(),
            "panel": {
                "countries": list(panel.countries),
                "start": str(panel.dates[0]),
                "end": str(panel.dates[-1]),
                "n_months": panel.n_months,
            },
            "weights": {
                "years": list(weights.years),
                "raw_sums": {str(y): weights.raw_sums[y] for y in weights.years},
            },
        },
        "countries": {c: _country_report(results[c]) for c in panel.countries},
        "group": {
            "common_calendar": {"start": str(dates[0]), "end": str(dates[-1]),
                                "n": len(dates)},
            "correlations": {
                kind: {
                    "countries": list(correlations[kind].countries),
                    "n": correlations[kind].n,
                    "r": _matrix(correlations[kind].r),
                    "p": _matrix(correlations[kind].p),
                } for kind in SHOCK_KINDS
            },
            "symmetry": {
                kind: {
                    "alpha": symmetry[kind].alpha,
                    "symmetric_pairs": {
                        f"{a}|{b}": flag
                        for (a, b), flag in sorted(symmetry[kind].symmetric_pairs.items())
                    },
                    "groups": [list(g) for g in symmetry[kind].groups],
                } for kind in SHOCK_KINDS
            },
            "size_speed": {
                "per_country": {
                    c: {
                        "supply_size": sizes[c].supply_size,
                        "supply_speed": sizes[c].supply_speed,
                        "demand_size": sizes[c].demand_size,
                        "demand_speed": sizes[c].demand_speed,
                    } for c in panel.countries
                },
                "average": averages,
            },
            "dispersion": {
                kind: {
                    "dates": [str(d) for d in dates],
                    "values": [float(v) for v in dispersion[kind]["values"]],
                    "trend": [float(v) for v in dispersion[kind]["trend"]],
                    "trend_change_pct": float(dispersion[kind]["trend_change_pct"]),
                } for kind in SHOCK_KINDS
            },
            "cost": {
                kind: {
                    country: [float(v) for v in cost[kind][country].values]
                    for country in panel.countries
                } for kind in SHOCK_KINDS
            },
            "cost_snapshots": snapshots,
        },
        "shocks": {
            country: {
                "dates": [str(d) for d in results[country].svar.dates],
                "supply": [float(v) for v in results[country].svar.shocks[:, 0]],
                "demand": [float(v) for v in results[country].svar.shocks[:, 1]],
            } for country in panel.countries
        },
    }
    return report


def render_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False, allow_nan=False) + "\n"


def _fmt3(value: float) -> str:
    return format(float(value), ".3f")


def _render_tables(report: dict) -> dict[str, str]:
    """Human-readable CSV tables; every figure is the JSON value at 3 decimals."""
    countries = report["metadata"]["panel"]["countries"]
    tables: dict[str, str] = {}

    lines = ["country,variable,level,level_stars,first_difference,first_difference_stars,conclusion"]
    for c in countries:
        for variable in VARIABLES:
            cell = report["countries"][c]["adf"][variable]
            lines.append(",".join([
                c, variable,
                _fmt3(cell["level"]["statistic"]), cell["level"]["stars"],
                _fmt3(cell["first_difference"]["statistic"]),
                cell["first_difference"]["stars"], cell["conclusion"],
            ]))
    tables["adf.csv"] = "\n".join(lines) + "\n"

    lines = ["country,hypothesis,trace_statistic,trace_cv_5pct,maxeig_statistic,maxeig_cv_5pct,selected_rank"]
    for c in countries:
        jo = report["countries"][c]["johansen"]
        for r, label in enumerate(("r = 0", "r <= 1")):
            lines.append(",".join([
                c, label,
                _fmt3(jo["trace_stats"][r]), _fmt3(jo["critical_values_trace"][r]),
                _fmt3(jo["max_eig_stats"][r]), _fmt3(jo["critical_values_maxeig"][r]),
                str(jo["selected_rank"]),
            ]))
    tables["johansen.csv"] = "\n".join(lines) + "\n"

    lines = ["country,p,stable,max_modulus,portmanteau_h,portmanteau_pvalue,arch_q,arch_pvalue_activity,arch_pvalue_price"]
    for c in countries:
        var_block = report["countries"][c]["var"]
        lines.append(",".join([
            c, str(var_block["p"]), str(var_block["stable"]).lower(),
            _fmt3(var_block["max_modulus"]),
            str(var_block["portmanteau"]["h"]), _fmt3(var_block["portmanteau"]["p_value"]),
            str(var_block["arch"]["activity"]["q"]),
            _fmt3(var_block["arch"]["activity"]["p_value"]),
            _fmt3(var_block["arch"]["price"]["p_value"]),
        ]))
    tables["var_summary.csv"] = "\n".join(lines) + "\n"

    for kind in SHOCK_KINDS:
        corr = report["group"]["correlations"][kind]
        header = ["country"] + corr["countries"]
        lines = [",".join(header)]
        for i, a in enumerate(corr["countries"]):
            row = [a]
            for j in range(len(corr["countries"])):
                if j > i:
                    row.append("")
                else:
                    stars = "" if i == j else significance_stars(corr["p"][i][j])
                    row.append(_fmt3(corr["r"][i][j]) + stars)
            lines.append(",".join(row))
        tables[f"correlation_{kind}.csv"] = "\n".join(lines) + "\n"

    lines = ["country,supply_size,supply_speed,demand_size,demand_speed"]
    per_country = report["group"]["size_speed"]["per_country"]
    for c in countries:
        row = per_country[c]
        lines.append(",".join([c, _fmt3(row["supply_size"]), _fmt3(row["supply_speed"]),
                               _fmt3(row["demand_size"]), _fmt3(row["demand_speed"])]))
    avg = report["group"]["size_speed"]["average"]
    lines.append(",".join(["average", _fmt3(avg["supply_size"]), _fmt3(avg["supply_speed"]),
                           _fmt3(avg["demand_size"]), _fmt3(avg["demand_speed"])]))
    tables["size_speed.csv"] = "\n".join(lines) + "\n"

    for kind in SHOCK_KINDS:
        disp = report["group"]["dispersion"][kind]
        lines = ["date,value,trend"]
        for d, v, t in zip(disp["dates"], disp["values"], disp["trend"]):
            lines.append(f"{d},{_fmt3(v)},{_fmt3(t)}")
        tables[f"dispersion_{kind}.csv"] = "\n".join(lines) + "\n"

        cost = report["group"]["cost"][kind]
        lines = ["date," + ",".join(countries)]
        disp_dates = disp["dates"]
        for t, d in enumerate(disp_dates):
            lines.append(d + "," + ",".join(_fmt3(cost[c][t]) for c in countries))
        tables[f"cost_{kind}.csv"] = "\n".join(lines) + "\n"

    snaps = report["group"]["cost_snapshots"]
    if snaps:
        snap_dates = report["metadata"]["config"]["snapshot_dates"]
        lines = ["kind,country," + ",".join(snap_dates)]
        for kind in SHOCK_KINDS:
            for c in countries:
                lines.append(",".join([kind, c] + [_fmt3(snaps[kind][c][d]) for d in snap_dates]))
        tables["cost_snapshots.csv"] = "\n".join(lines) + "\n"

    lines = ["kind,members"]
    for kind in SHOCK_KINDS:
        for group in report["group"]["symmetry"][kind]["groups"]:
            lines.append(f"{kind},{';'.join(group)}")
    tables["groups.csv"] = "\n".join(lines) + "\n"

    for c in countries:
        shocks = report["shocks"][c]
        lines = ["country,date,supply_shock,demand_shock"]
        for d, s, dm in zip(shocks["dates"], shocks["supply"], shocks["demand"]):
            lines.append(f"{c},{d},{format(s, '.15g')},{format(dm, '.15g')}")
        tables[f"shocks_{c}.csv"] = "\n".join(lines) + "\n"

    return tables


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """Validate, compute, and write the full report bundle."""
    config.validate()
    panel = load_panel(config.panel_path)
    for country, spec in config.dummies:
        if country not in panel.countries:
            raise ConfigError(f"dummy references unknown country {country!r}")
        del spec
    weights = load_weights(config.weights_path)

    report = build_report(panel, weights, config)
    tables = _render_tables(report)

    output_dir = Path(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        for name in sorted(tables):
            path = output_dir / name
            path.write_text(tables[name], encoding="utf-8")
            written.append(path)
        report_path = output_dir / "report.json"
        report_path.write_text(render_json(report), encoding="utf-8")
        written.append(report_path)
    except OSError:
        for path in written:
            try:
                os.unlink(path)
            except OSError:
                pass
        raise
    return PipelineResult(report=report, output_dir=output_dir,
                          files=tuple(sorted(p.name for p in written)))
