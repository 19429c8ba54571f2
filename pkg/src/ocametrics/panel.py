"""Monthly macro panel: loading, validation and series transforms.

The on-disk format is a long CSV with header ``country,date,variable,value``
where ``date`` is ``YYYY-MM`` and ``variable`` is ``MEAI`` (activity index)
or ``CPI`` (price index).  Row order is irrelevant.  In memory the two
variables are called ``activity`` and ``price``.

Transforms are plain array functions: :func:`rebase` (proportional index
rebasing so the base-year mean is exactly 100), :func:`log_diff`
(month-on-month log growth) and :func:`seasonal_adjust_dummies` (OLS
month-of-year dummy adjustment, mean preserving).  All are pure; panels and
transformed series are immutable after construction.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Mapping

import numpy as np

from .errors import (
    BaseYearAbsentError,
    CalendarGapError,
    DuplicateRowError,
    MissingCellError,
    NonPositiveValueError,
    PanelError,
    TooShortError,
)
from .months import Month, is_contiguous

VARIABLES = ("activity", "price")
CSV_HEADER = ("country", "date", "variable", "value")
_COLUMN_TO_VARIABLE = {"MEAI": "activity", "CPI": "price"}
_VARIABLE_TO_COLUMN = {v: k for k, v in _COLUMN_TO_VARIABLE.items()}


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Panel:
    """Aligned positive monthly (activity, price) series for several countries."""

    countries: tuple[str, ...]
    dates: tuple[Month, ...]
    values: Mapping[tuple[str, str], np.ndarray] = field(repr=False)

    def __post_init__(self):
        if list(self.countries) != sorted(set(self.countries)):
            raise PanelError("countries must be sorted and unique")
        if not is_contiguous(self.dates):
            raise PanelError("panel calendar must be contiguous")
        for country in self.countries:
            for variable in VARIABLES:
                arr = self.values[(country, variable)]
                if arr.shape != (len(self.dates),):
                    raise PanelError(f"misaligned series for {country}/{variable}")
                if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                    raise NonPositiveValueError(
                        f"non-positive or non-finite value in {country}/{variable}",
                        country=country, variable=variable)

    def series(self, country: str, variable: str) -> np.ndarray:
        """Raw index series for one country and one variable."""
        return self.values[(country, variable)]

    @property
    def n_months(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class TransformedSeries:
    """A differenced (dimensionless growth-rate) series with its calendar."""

    country: str
    variable: str
    dates: tuple[Month, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise PanelError(f"unknown variable {self.variable!r}")
        if len(self.dates) != len(self.values):
            raise PanelError("dates and values must align")
        if not np.all(np.isfinite(self.values)):
            raise PanelError("transformed series must be finite")


def load_panel(source: str | Path | IO[str]) -> Panel:
    """Parse and validate the long CSV panel format.

    Raises
    ------
    DuplicateRowError, NonPositiveValueError, CalendarGapError,
    MissingCellError
        Each names the offending (country, date, variable) cell.
    """
    if isinstance(source, (str, Path)):
        try:
            with open(source, "r", encoding="utf-8", newline="") as fh:
                return load_panel(fh)
        except OSError as exc:
            raise PanelError(f"cannot read panel {source}: {exc}") from None

    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise PanelError("empty input") from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise PanelError(f"expected header {','.join(CSV_HEADER)}, got {','.join(header)}")

    cells: dict[tuple[str, Month, str], float] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 4:
            raise PanelError(f"line {lineno}: expected 4 fields, got {len(row)}")
        country, date_text, column, value_text = (f.strip() for f in row)
        try:
            date = Month.parse(date_text)
        except ValueError as exc:
            raise PanelError(f"line {lineno}: {exc}", country=country) from None
        if column not in _COLUMN_TO_VARIABLE:
            raise PanelError(f"line {lineno}: unknown variable {column!r}",
                             country=country, date=str(date))
        variable = _COLUMN_TO_VARIABLE[column]
        try:
            value = float(value_text)
        except ValueError:
            raise PanelError(f"line {lineno}: non-numeric value {value_text!r}",
                             country=country, date=str(date), variable=column) from None
        if not math.isfinite(value) or value <= 0:
            raise NonPositiveValueError(
                f"non-positive value for {country} {date} {column}: {value_text}",
                country=country, date=str(date), variable=column)
        key = (country, date, variable)
        if key in cells:
            raise DuplicateRowError(f"duplicate row for {country} {date} {column}",
                                    country=country, date=str(date), variable=column)
        cells[key] = value

    if not cells:
        raise PanelError("no data rows")

    countries = sorted({c for c, _, _ in cells})
    lo = min(d for _, d, _ in cells)
    hi = max(d for _, d, _ in cells)
    dates = tuple(Month.from_index(i) for i in range(lo.index, hi.index + 1))

    for country in countries:
        for date in dates:
            has = {v: (country, date, v) in cells for v in VARIABLES}
            if not any(has.values()):
                raise CalendarGapError(
                    f"no observations for {country} at {date}",
                    country=country, date=str(date))
            for variable in VARIABLES:
                if not has[variable]:
                    raise MissingCellError(
                        f"missing {_VARIABLE_TO_COLUMN[variable]} for {country} at {date}",
                        country=country, date=str(date),
                        variable=_VARIABLE_TO_COLUMN[variable])

    values = {
        (country, variable): _frozen([cells[(country, d, variable)] for d in dates])
        for country in countries for variable in VARIABLES
    }
    return Panel(countries=tuple(countries), dates=dates, values=values)


def dump_panel(panel: Panel, stream: IO[str]) -> None:
    """Serialize in the same long CSV format; round-trips values exactly."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for country in panel.countries:
        for date in panel.dates:
            for variable in VARIABLES:
                value = panel.series(country, variable)[date - panel.dates[0]]
                writer.writerow([country, str(date), _VARIABLE_TO_COLUMN[variable],
                                 repr(float(value))])


def panel_to_csv(panel: Panel) -> str:
    buf = io.StringIO()
    dump_panel(panel, buf)
    return buf.getvalue()


def rebase(dates: Iterable[Month], values: np.ndarray, base_year: int) -> np.ndarray:
    """Rescale so the series averages exactly 100 over the base-year months."""
    values = np.asarray(values, dtype=np.float64)
    mask = np.array([d.year == base_year for d in dates])
    if not mask.any():
        raise BaseYearAbsentError(f"no observations in base year {base_year}")
    return 100.0 * values / values[mask].mean()


def log_diff(values: np.ndarray) -> np.ndarray:
    """First difference of the natural logarithm; output is one shorter."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        raise TooShortError("log_diff needs at least 2 observations")
    if np.any(values <= 0):
        raise NonPositiveValueError("log_diff requires a strictly positive series")
    logs = np.log(values)
    return logs[1:] - logs[:-1]


def seasonal_adjust_dummies(dates: Iterable[Month], values: np.ndarray) -> np.ndarray:
    """Remove OLS-fitted month-of-year effects, preserving the sample mean.

    The regression uses an intercept, a linear trend and 11 monthly dummies;
    only the fitted dummy component (recentered over the sample) is
    subtracted, so trends and non-seasonal variation pass through.
    """
    values = np.asarray(values, dtype=np.float64)
    months = np.array([d.month for d in dates])
    n = values.size
    if n < 24:
        raise TooShortError("seasonal adjustment needs at least 24 months")
    X = np.column_stack(
        [np.ones(n), np.arange(n, dtype=np.float64)]
        + [(months == m).astype(np.float64) for m in range(2, 13)])
    coef, *_ = np.linalg.lstsq(X, values, rcond=None)
    seasonal = X[:, 2:] @ coef[2:]
    return values - seasonal + seasonal.mean()


def log_level_series(panel: Panel, country: str, variable: str, *,
                     base_year: int, seasonal: bool = False) -> np.ndarray:
    """Log of the rebased index, optionally dummy-adjusted on the log scale."""
    level = rebase(panel.dates, panel.series(country, variable), base_year)
    logs = np.log(level)
    if seasonal:
        logs = seasonal_adjust_dummies(panel.dates, logs)
    return logs


def transform_pair(panel: Panel, country: str, *, base_year: int,
                   seasonal: bool = False) -> tuple[TransformedSeries, TransformedSeries]:
    """Per-country (activity, price) growth-rate pair fed to the VAR."""
    out = []
    for variable in VARIABLES:
        logs = log_level_series(panel, country, variable,
                                base_year=base_year, seasonal=seasonal)
        out.append(TransformedSeries(
            country=country, variable=variable, dates=panel.dates[1:],
            values=_frozen(np.diff(logs))))
    return out[0], out[1]
