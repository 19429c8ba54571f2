"""Command-line front end.

``ocametrics run`` drives the full pipeline from a panel CSV and a weights
CSV to a report bundle.  The remaining subcommands are thin wrappers over
single library operations and write CSV to standard output (JSON with
``--json``).
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from .errors import ConfigError, OcaError
from .identification import identify_bq, irf_structural, size_and_speed
from .metrics import (
    classify_symmetry,
    correlation_matrix,
    cost_of_inclusion,
    dispersion_index,
    hp_filter,
    load_weights,
    significance_stars,
)
from .months import Month
from .panel import dump_panel, load_panel, transform_pair
from .pipeline import PipelineConfig, analyze_country, run_pipeline
from .simulate import synthetic_panel
from .unit_root import adf_test
from .var import DummySpec, fit_var, select_lag

_VARIABLE_ALIASES = {"meai": "activity", "activity": "activity",
                     "cpi": "price", "price": "price"}


def _parse_dummy(text: str) -> tuple[str, DummySpec]:
    parts = text.split(":")
    if len(parts) == 3:
        parts.append("step")
    if len(parts) != 4:
        raise ConfigError(f"dummy must be COUNTRY:VAR:YYYY-MM:step|pulse, got {text!r}")
    country, variable, date_text, form = (p.strip() for p in parts)
    variable = _VARIABLE_ALIASES.get(variable.lower())
    if variable is None:
        raise ConfigError(f"dummy variable must be MEAI or CPI, got {parts[1]!r}")
    try:
        break_date = Month.parse(date_text)
        spec = DummySpec(variable=variable, break_date=break_date, form=form)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return country, spec


def _parse_snapshots(text: str) -> tuple[Month, ...]:
    try:
        return tuple(Month.parse(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _load_config_file(path: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a flat JSON object")
    return raw


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


def _domain_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except OcaError as exc:
            _fail(exc)
    return wrapper


def _series_from_csv(path: str) -> tuple[tuple[Month, ...], np.ndarray]:
    dates: list[Month] = []
    values: list[float] = []
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != "date,value":
        raise ConfigError(f"{path}: expected header date,value")
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            date_text, value_text = line.split(",")
            dates.append(Month.parse(date_text))
            values.append(float(value_text))
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return tuple(dates), np.array(values)


@click.group()
def main():
    """Structural shock extraction and currency-area feasibility metrics."""


@main.command("run")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Flat key-value JSON config; flags override it.")
@click.option("--panel", "panel_path", type=click.Path(), default=None)
@click.option("--weights", "weights_path", type=click.Path(), default=None)
@click.option("--output-dir", type=click.Path(), default=None)
@click.option("--base-year", type=int, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--max-lags", type=int, default=None)
@click.option("--hp-lambda", type=float, default=None)
@click.option("--irf-horizon", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--snapshot-dates", type=str, default=None,
              help="Comma-separated YYYY-MM dates for the cost table.")
@click.option("--dummy", "dummy_flags", multiple=True,
              help="COUNTRY:VAR:YYYY-MM:step|pulse break dummy (repeatable).")
@click.option("--seasonal-adjust", is_flag=True, default=None,
              help="Apply the month-dummy seasonal adjustment to log levels.")
@click.option("--portmanteau-h", type=int, default=None)
@click.option("--arch-q", type=int, default=None)
@click.option("--threads", type=int, default=None)
@_domain_errors
def run_command(config_path, panel_path, weights_path, output_dir, base_year,
                alpha, max_lags, hp_lambda, irf_horizon, seed, snapshot_dates,
                dummy_flags, seasonal_adjust, portmanteau_h, arch_q, threads):
    """Run the full pipeline and write the report bundle."""
    raw = _load_config_file(config_path) if config_path else {}

    def pick(flag, key, fallback):
        if flag is not None:
            return flag
        return raw.get(key, fallback)

    dummy_texts = list(raw.get("dummy", []) or [])
    if isinstance(dummy_texts, str):
        dummy_texts = [dummy_texts]
    if dummy_flags:
        dummy_texts = list(dummy_flags)
    snapshot_text = pick(snapshot_dates, "snapshot_dates", "")
    if isinstance(snapshot_text, list):
        snapshot_text = ",".join(snapshot_text)

    config = PipelineConfig(
        panel_path=str(pick(panel_path, "panel", "")),
        weights_path=str(pick(weights_path, "weights", "")),
        output_dir=str(pick(output_dir, "output_dir", "")),
        base_year=int(pick(base_year, "base_year", 2010)),
        alpha=float(pick(alpha, "alpha", 0.05)),
        max_lags=int(pick(max_lags, "max_lags", 12)),
        hp_lambda=float(pick(hp_lambda, "hp_lambda", 14400.0)),
        irf_horizon=int(pick(irf_horizon, "irf_horizon", 48)),
        seed=int(pick(seed, "seed", 0)),
        seasonal_adjust=bool(pick(seasonal_adjust, "seasonal_adjust", False)),
        snapshot_dates=_parse_snapshots(snapshot_text) if snapshot_text else (),
        dummies=tuple(_parse_dummy(t) for t in dummy_texts),
        portmanteau_h=int(pick(portmanteau_h, "portmanteau_h", 12)),
        arch_q=int(pick(arch_q, "arch_q", 4)),
        threads=int(pick(threads, "threads", 1)),
    )
    result = run_pipeline(config)
    click.echo(f"wrote {len(result.files)} files to {result.output_dir}")


def _emit(rows: list[dict], as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps(rows, sort_keys=True))
        return
    if not rows:
        return
    header = list(rows[0])
    click.echo(",".join(header))
    for row in rows:
        click.echo(",".join(str(row[h]) for h in header))


@main.command("adf")
@click.option("--series", "series_path", type=click.Path(), required=True,
              help="CSV with header date,value.")
@click.option("--spec", type=click.Choice(["none", "constant", "trend"]),
              default="trend")
@click.option("--max-lags", type=int, default=12)
@click.option("--lag-rule", type=str, default="aic",
              help='"aic" or an integer fixing the lag count.')
@click.option("--json", "as_json", is_flag=True, default=False)
@_domain_errors
def adf_command(series_path, spec, max_lags, lag_rule, as_json):
    """Unit-root test on one series."""
    _, values = _series_from_csv(series_path)
    rule: int | str = "aic"
    if lag_rule != "aic":
        try:
            rule = int(lag_rule)
        except ValueError:
            raise ConfigError(f'--lag-rule must be "aic" or an integer, got {lag_rule!r}')
    res = adf_test(values, spec=spec, max_lags=max_lags, lag_rule=rule)
    row = {
        "statistic": res.statistic, "lags_used": res.lags_used, "spec": res.spec,
        "nobs": res.nobs,
        "cv_1pct": res.critical_values[0.01], "cv_5pct": res.critical_values[0.05],
        "cv_10pct": res.critical_values[0.10],
        "reject_at": "" if res.reject_at is None else res.reject_at,
    }
    _emit([row], as_json)


def _country_options(func):
    for option in reversed([
        click.option("--panel", "panel_path", type=click.Path(), required=True),
        click.option("--country", type=str, required=True),
        click.option("--base-year", type=int, default=2010),
        click.option("--max-lags", type=int, default=12),
        click.option("--seasonal-adjust", is_flag=True, default=False),
        click.option("--dummy", "dummy_flags", multiple=True),
    ]):
        func = option(func)
    return func


def _country_inputs(panel_path, country, base_year, seasonal_adjust, dummy_flags):
    panel = load_panel(panel_path)
    if country not in panel.countries:
        raise ConfigError(f"country {country!r} not in panel {panel.countries}")
    pairs = [_parse_dummy(t) for t in dummy_flags]
    dummies = tuple(spec for c, spec in pairs if c == country)
    data = transform_pair(panel, country, base_year=base_year, seasonal=seasonal_adjust)
    return panel, data, dummies


@main.command("johansen")
@_country_options
@click.option("--lag-order", type=int, default=None,
              help="Levels-VAR order; defaults to the selected lag + 1.")
@click.option("--json", "as_json", is_flag=True, default=False)
@_domain_errors
def johansen_command(panel_path, country, base_year, max_lags, seasonal_adjust,
                     dummy_flags, lag_order, as_json):
    """Cointegration test on one country's (log activity, log price) pair."""
    from .cointegration import johansen_test
    from .panel import log_level_series

    panel, data, dummies = _country_inputs(panel_path, country, base_year,
                                           seasonal_adjust, dummy_flags)
    if lag_order is None:
        lag_order = select_lag(data, max_p=max_lags, dummies=dummies).p + 1
    logs = tuple(log_level_series(panel, country, v, base_year=base_year,
                                  seasonal=seasonal_adjust)
                 for v in ("activity", "price"))
    res = johansen_test(logs, lag_order=lag_order)
    rows = []
    for r, label in enumerate(("r = 0", "r <= 1")):
        rows.append({
            "country": country, "hypothesis": label,
            "eigenvalue": res.eigenvalues[r],
            "trace_statistic": res.trace_stats[r],
            "trace_cv_5pct": res.critical_values_trace[r],
            "maxeig_statistic": res.max_eig_stats[r],
            "maxeig_cv_5pct": res.critical_values_maxeig[r],
            "selected_rank": res.selected_rank,
        })
    _emit(rows, as_json)


@main.command("var")
@_country_options
@click.option("--p", "fixed_p", type=int, default=None,
              help="Fit this lag order instead of selecting one.")
@click.option("--portmanteau-h", type=int, default=12)
@click.option("--arch-q", type=int, default=4)
@click.option("--alpha", type=float, default=0.05)
@click.option("--json", "as_json", is_flag=True, default=False)
@_domain_errors
def var_command(panel_path, country, base_year, max_lags, seasonal_adjust,
                dummy_flags, fixed_p, portmanteau_h, arch_q, alpha, as_json):
    """Lag selection, estimation and diagnostics for one country."""
    from .var import arch_lm_test, portmanteau_test, stability

    _, data, dummies = _country_inputs(panel_path, country, base_year,
                                       seasonal_adjust, dummy_flags)
    if fixed_p is None:
        selection = select_lag(data, max_p=max_lags, dummies=dummies,
                               portmanteau_h=portmanteau_h, arch_q=arch_q,
                               alpha=alpha)
        p = selection.p
    else:
        p = fixed_p
    model = fit_var(data, p, dummies)
    stab = stability(model)
    port = portmanteau_test(model, max(portmanteau_h, p + 1))
    arch = [arch_lm_test(model.residuals[:, i], arch_q) for i in range(2)]
    _emit([{
        "country": country, "p": p, "stable": stab.stable,
        "max_modulus": stab.max_modulus,
        "portmanteau_pvalue": port.p_value,
        "arch_pvalue_activity": arch[0].p_value,
        "arch_pvalue_price": arch[1].p_value,
        "nobs": model.nobs,
    }], as_json)


@main.command("identify")
@_country_options
@click.option("--p", "fixed_p", type=int, default=None)
@click.option("--irf-horizon", type=int, default=48)
@click.option("--json", "as_json", is_flag=True, default=False)
@_domain_errors
def identify_command(panel_path, country, base_year, max_lags, seasonal_adjust,
                     dummy_flags, fixed_p, irf_horizon, as_json):
    """Structural shocks for one country, 15-significant-digit CSV."""
    _, data, dummies = _country_inputs(panel_path, country, base_year,
                                       seasonal_adjust, dummy_flags)
    p = fixed_p if fixed_p is not None else select_lag(data, max_p=max_lags,
                                                       dummies=dummies).p
    model = fit_var(data, p, dummies)
    svar = identify_bq(model)
    if as_json:
        irf = irf_structural(svar, model, irf_horizon)
        ss = size_and_speed(irf)
        click.echo(json.dumps({
            "country": country, "p": p,
            "a0": [[float(v) for v in row] for row in svar.a0],
            "long_run": [[float(v) for v in row] for row in svar.long_run],
            "supply_size": ss.supply_size, "supply_speed": ss.supply_speed,
            "demand_size": ss.demand_size, "demand_speed": ss.demand_speed,
        }, sort_keys=True))
        return
    click.echo("country,date,supply_shock,demand_shock")
    for i, date in enumerate(svar.dates):
        click.echo(f"{country},{date},{format(svar.shocks[i, 0], '.15g')},"
                   f"{format(svar.shocks[i, 1], '.15g')}")


def _group_shocks(panel_path, base_year, seasonal_adjust, max_lags, dummy_flags):
    panel = load_panel(panel_path)
    pairs = [_parse_dummy(t) for t in dummy_flags]
    config = PipelineConfig(panel_path=panel_path, weights_path="-", output_dir="-",
                            base_year=base_year, max_lags=max_lags,
                            seasonal_adjust=seasonal_adjust, dummies=tuple(pairs))
    results = {c: analyze_country(panel, c, config) for c in panel.countries}
    from .pipeline import _common_shocks
    dates, shocks = _common_shocks(results)
    return panel, dates, shocks


@main.command("correlate")
@click.option("--panel", "panel_path", type=click.Path(), required=True)
@click.option("--base-year", type=int, default=2010)
@click.option("--max-lags", type=int, default=12)
@click.option("--seasonal-adjust", is_flag=True, default=False)
@click.option("--dummy", "dummy_flags", multiple=True)
@click.option("--alpha", type=float, default=0.05)
@click.option("--kind", type=click.Choice(["supply", "demand"]), default="supply")
@click.option("--json", "as_json", is_flag=True, default=False)
@_domain_errors
def correlate_command(panel_path, base_year, max_lags, seasonal_adjust,
                      dummy_flags, alpha, kind, as_json):
    """Cross-country shock correlation matrix with significance stars."""
    _, _, shocks = _group_shocks(panel_path, base_year, seasonal_adjust,
                                 max_lags, dummy_flags)
    report = correlation_matrix(shocks[kind], kind=kind)
    symmetry = classify_symmetry(report, alpha)
    if as_json:
        click.echo(json.dumps({
            "countries": list(report.countries), "n": report.n,
            "r": [[float(v) for v in row] for row in report.r],
            "p": [[float(v) for v in row] for row in report.p],
            "groups": [list(g) for g in symmetry.groups],
        }, sort_keys=True))
        return
    click.echo("country," + ",".join(report.countries))
    for i, a in enumerate(report.countries):
        cells = []
        for j in range(len(report.countries)):
            if j > i:
                cells.append("")
            elif i == j:
                cells.append("1.000")
            else:
                cells.append(format(report.r[i][j], ".3f")
                             + significance_stars(report.p[i][j]))
        click.echo(a + "," + ",".join(cells))


@main.command("disperse")
@click.option("--panel", "panel_path", type=click.Path(), required=True)
@click.option("--weights", "weights_path", type=click.Path(), required=True)
@click.option("--base-year", type=int, default=2010)
@click.option("--max-lags", type=int, default=12)
@click.option("--seasonal-adjust", is_flag=True, default=False)
@click.option("--dummy", "dummy_flags", multiple=True)
@click.option("--hp-lambda", type=float, default=14400.0)
@click.option("--kind", type=click.Choice(["supply", "demand"]), default="supply")
@click.option("--json", "as_json", is_flag=True, default=False)
@_domain_errors
def disperse_command(panel_path, weights_path, base_year, max_lags,
                     seasonal_adjust, dummy_flags, hp_lambda, kind, as_json):
    """Weighted cross-country dispersion index and its trend."""
    _, dates, shocks = _group_shocks(panel_path, base_year, seasonal_adjust,
                                     max_lags, dummy_flags)
    weights = load_weights(weights_path)
    series = dispersion_index(shocks[kind], dates, weights, kind=kind)
    trend, _ = hp_filter(series.values, hp_lambda)
    rows = [{"date": str(d), "value": float(v), "trend": float(t)}
            for d, v, t in zip(dates, series.values, trend)]
    _emit(rows, as_json)


@main.command("cost")
@click.option("--panel", "panel_path", type=click.Path(), required=True)
@click.option("--weights", "weights_path", type=click.Path(), required=True)
@click.option("--exclude", "excluded", type=str, required=True,
              help="Country whose cost-of-inclusion series to compute.")
@click.option("--base-year", type=int, default=2010)
@click.option("--max-lags", type=int, default=12)
@click.option("--seasonal-adjust", is_flag=True, default=False)
@click.option("--dummy", "dummy_flags", multiple=True)
@click.option("--json", "as_json", is_flag=True, default=False)
@_domain_errors
def cost_command(panel_path, weights_path, excluded, base_year, max_lags,
                 seasonal_adjust, dummy_flags, as_json):
    """Leave-one-out cost-of-inclusion series for one country."""
    _, dates, shocks = _group_shocks(panel_path, base_year, seasonal_adjust,
                                     max_lags, dummy_flags)
    weights = load_weights(weights_path)
    series = {kind: cost_of_inclusion(shocks[kind], dates, weights, excluded, kind=kind)
              for kind in ("supply", "demand")}
    rows = [{"country": excluded, "date": str(d),
             "supply": float(series["supply"].values[i]),
             "demand": float(series["demand"].values[i])}
            for i, d in enumerate(dates)]
    _emit(rows, as_json)


@main.command("simulate")
@click.option("--seed", type=int, default=0)
@click.option("--t", "n_months", type=int, default=133,
              help="Number of months in the fixture panel.")
@click.option("--countries", "n_countries", type=int, default=7)
@click.option("--start", type=str, default="2009-01")
@click.option("--output", type=click.Path(), default=None,
              help="Panel CSV destination (stdout when omitted).")
@click.option("--weights-output", type=click.Path(), default=None,
              help="Also write a near-equal weights CSV for the fixture.")
@_domain_errors
def simulate_command(seed, n_months, n_countries, start, output, weights_output):
    """Generate a reproducible synthetic fixture panel."""
    try:
        first = Month.parse(start)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    panel = synthetic_panel(seed, n_countries, n_months, start=first)
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            dump_panel(panel, fh)
    else:
        dump_panel(panel, sys.stdout)
    if weights_output:
        share = round(1.0 / n_countries, 3)
        lines = ["year,country,weight"]
        for year in range(panel.dates[0].year, panel.dates[-1].year + 1):
            for country in panel.countries:
                lines.append(f"{year},{country},{share}")
        Path(weights_output).write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
