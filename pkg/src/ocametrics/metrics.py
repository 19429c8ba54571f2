"""Cross-country symmetry and synchronization analytics.

Includes pairwise shock correlations with exact t-based significance,
clique-based detection of mutually symmetric country groups, the
size-weighted cross-country dispersion index, the Hodrick-Prescott trend
via a banded pentadiagonal solve, and leave-one-out cost-of-inclusion
series.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Mapping, Sequence

import numpy as np
from scipy import linalg as slinalg
from scipy import stats as sstats

from .errors import (
    DateRangeError,
    DegenerateWeightsError,
    GroupTooSmallError,
    InsufficientOverlapError,
    MissingWeightYearError,
    TooShortError,
    ZeroBaseError,
    ZeroDispersionError,
    ZeroVarianceError,
)
from .months import Month
from .panel import _frozen

WEIGHT_SUM_TOLERANCE = 0.005


# --------------------------------------------------------------------------
# correlations and symmetry
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CorrelationReport:
    countries: tuple[str, ...]
    r: np.ndarray = field(repr=False)
    p: np.ndarray = field(repr=False)
    n: int = 0
    shock_kind: str = "supply"


@dataclass(frozen=True)
class SymmetryReport:
    """Pairwise symmetric/asymmetric labels and candidate country groups."""

    alpha: float
    symmetric_pairs: Mapping[tuple[str, str], bool]
    groups: tuple[tuple[str, ...], ...]


def correlation_pvalue(r: float, n: int) -> float:
    """Two-sided p-value of a Pearson coefficient under the zero null."""
    if n < 3:
        raise InsufficientOverlapError("need n >= 3 for a p-value")
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return float(2.0 * sstats.t.sf(abs(t), n - 2))


def correlation_matrix(shocks: Mapping[str, np.ndarray],
                       kind: str = "supply") -> CorrelationReport:
    """Pairwise Pearson correlations of aligned per-country shock series."""
    countries = tuple(sorted(shocks))
    if len(countries) < 2:
        raise GroupTooSmallError("need at least 2 countries")
    arrays = [np.asarray(shocks[c], dtype=np.float64) for c in countries]
    n = arrays[0].size
    if any(a.size != n for a in arrays):
        raise InsufficientOverlapError("shock series must share a common calendar")
    if n < 10:
        raise InsufficientOverlapError(f"common overlap {n} < 10")
    for c, a in zip(countries, arrays):
        if np.ptp(a) == 0.0:
            raise ZeroVarianceError(f"zero-variance shock series for {c}")

    k = len(countries)
    r = np.eye(k)
    p = np.zeros((k, k))
    for i, j in itertools.combinations(range(k), 2):
        rij = float(np.corrcoef(arrays[i], arrays[j])[0, 1])
        r[i, j] = r[j, i] = rij
        p[i, j] = p[j, i] = correlation_pvalue(rij, n)
    return CorrelationReport(countries=countries, r=_frozen(r), p=_frozen(p),
                             n=n, shock_kind=kind)


def classify_symmetry(report: CorrelationReport, alpha: float = 0.05) -> SymmetryReport:
    """Label pairs symmetric iff positively and significantly correlated.

    Candidate groups are the maximal cliques (size >= 3) of the graph whose
    edges are the symmetric pairs; mutual symmetry is required throughout.
    """
    countries = report.countries
    k = len(countries)
    pairs: dict[tuple[str, str], bool] = {}
    adjacency = np.zeros((k, k), dtype=bool)
    for i, j in itertools.combinations(range(k), 2):
        symmetric = bool(report.r[i, j] > 0.0 and report.p[i, j] < alpha)
        key = tuple(sorted((countries[i], countries[j])))
        pairs[key] = symmetric
        adjacency[i, j] = adjacency[j, i] = symmetric

    cliques: list[tuple[int, ...]] = []
    for size in range(k, 2, -1):
        for combo in itertools.combinations(range(k), size):
            if not all(adjacency[a, b] for a, b in itertools.combinations(combo, 2)):
                continue
            if any(set(combo) <= set(big) for big in cliques):
                continue
            cliques.append(combo)
    groups = tuple(sorted((tuple(sorted(countries[i] for i in c)) for c in cliques),
                          key=lambda g: (-len(g), g)))
    return SymmetryReport(alpha=alpha, symmetric_pairs=pairs, groups=groups)


def significance_stars(p: float) -> str:
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.10:
        return "*"
    return ""


# --------------------------------------------------------------------------
# weights
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightTable:
    """Per-year, per-country economic-size weights, renormalized to sum to 1."""

    weights: Mapping[int, Mapping[str, float]]
    raw_sums: Mapping[int, float]

    @property
    def years(self) -> tuple[int, ...]:
        return tuple(sorted(self.weights))

    def for_group(self, year: int, countries: Sequence[str]) -> np.ndarray:
        """Weights for a subset of countries, renormalized to sum to 1."""
        if year not in self.weights:
            raise MissingWeightYearError(f"no weights for year {year}")
        year_weights = self.weights[year]
        try:
            w = np.array([year_weights[c] for c in countries], dtype=np.float64)
        except KeyError as exc:
            raise MissingWeightYearError(
                f"no weight for country {exc.args[0]} in year {year}") from None
        total = w.sum()
        if total <= 0.0:
            raise DegenerateWeightsError(f"weights for {year} sum to {total}")
        return w / total


def build_weight_table(rows: Mapping[int, Mapping[str, float]]) -> WeightTable:
    weights: dict[int, dict[str, float]] = {}
    raw_sums: dict[int, float] = {}
    for year in sorted(rows):
        year_weights = dict(rows[year])
        if len(year_weights) < 2:
            raise DegenerateWeightsError(f"year {year} needs at least 2 countries")
        for country, w in year_weights.items():
            if not (0.0 < w < 1.0):
                raise DegenerateWeightsError(
                    f"weight for {country} in {year} must be in (0, 1), got {w}")
        total = sum(year_weights.values())
        if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise DegenerateWeightsError(
                f"weights for {year} sum to {total:.4f}, outside 1 +/- {WEIGHT_SUM_TOLERANCE}")
        raw_sums[year] = total
        weights[year] = {c: w / total for c, w in year_weights.items()}
    if not weights:
        raise DegenerateWeightsError("empty weight table")
    return WeightTable(weights=weights, raw_sums=raw_sums)


def load_weights(source: str | Path | IO[str]) -> WeightTable:
    """Parse the ``year,country,weight`` CSV."""
    if isinstance(source, (str, Path)):
        try:
            with open(source, "r", encoding="utf-8", newline="") as fh:
                return load_weights(fh)
        except OSError as exc:
            raise DegenerateWeightsError(f"cannot read weights {source}: {exc}") from None
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != ("year", "country", "weight"):
        raise DegenerateWeightsError("expected header year,country,weight")
    rows: dict[int, dict[str, float]] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 3:
            raise DegenerateWeightsError(f"line {lineno}: expected 3 fields")
        year_text, country, weight_text = (f.strip() for f in row)
        try:
            year = int(year_text)
            weight = float(weight_text)
        except ValueError:
            raise DegenerateWeightsError(f"line {lineno}: malformed row") from None
        per_year = rows.setdefault(year, {})
        if country in per_year:
            raise DegenerateWeightsError(
                f"line {lineno}: duplicate weight for {country} in {year}")
        per_year[country] = weight
    return build_weight_table(rows)


# --------------------------------------------------------------------------
# dispersion and cost of inclusion
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DispersionSeries:
    dates: tuple[Month, ...]
    values: np.ndarray = field(repr=False)
    shock_kind: str = "supply"


@dataclass(frozen=True)
class CostSeries:
    country: str
    dates: tuple[Month, ...]
    values: np.ndarray = field(repr=False)
    shock_kind: str = "supply"


def _aligned_matrix(shocks: Mapping[str, np.ndarray], dates: Sequence[Month]):
    countries = tuple(sorted(shocks))
    arrays = [np.asarray(shocks[c], dtype=np.float64) for c in countries]
    n = len(dates)
    if any(a.size != n for a in arrays):
        raise InsufficientOverlapError("shock series must match the calendar")
    return countries, np.column_stack(arrays)


def _dispersion_values(x: np.ndarray, dates: Sequence[Month],
                       countries: Sequence[str], weights: WeightTable) -> np.ndarray:
    out = np.empty(len(dates))
    year_cache: dict[int, tuple[np.ndarray, float]] = {}
    for t, date in enumerate(dates):
        cached = year_cache.get(date.year)
        if cached is None:
            w = weights.for_group(date.year, countries)
            denom = 1.0 - float(w @ w)
            if denom <= 0.0:
                raise DegenerateWeightsError(
                    f"weight concentration leaves no cross-country variance in {date.year}")
            cached = year_cache[date.year] = (w, denom)
        w, denom = cached
        dev = x[t] - float(w @ x[t])
        out[t] = math.sqrt(max(float(w @ (dev * dev)) / denom, 0.0))
    return out


def dispersion_index(shocks: Mapping[str, np.ndarray], dates: Sequence[Month],
                     weights: WeightTable, kind: str = "supply") -> DispersionSeries:
    """Size-weighted cross-country standard deviation of shocks, per month.

    Annual weights apply as step functions across the months of their year
    and are renormalized to sum to exactly 1 before use.
    """
    countries, x = _aligned_matrix(shocks, dates)
    if len(countries) < 2:
        raise GroupTooSmallError("need at least 2 countries")
    values = _dispersion_values(x, dates, countries, weights)
    return DispersionSeries(dates=tuple(dates), values=_frozen(values), shock_kind=kind)


def cost_of_inclusion(shocks: Mapping[str, np.ndarray], dates: Sequence[Month],
                      weights: WeightTable, country: str,
                      kind: str = "supply") -> CostSeries:
    """Relative change in group dispersion when ``country`` is excluded.

    Positive values mean the country's inclusion lowers dispersion (a
    convergence source); negative values mean it raises dispersion.
    """
    countries, x = _aligned_matrix(shocks, dates)
    if country not in countries:
        raise DateRangeError(f"unknown country {country!r}")
    if len(countries) < 3:
        raise GroupTooSmallError("cost of inclusion needs a group of at least 3")
    full = _dispersion_values(x, dates, countries, weights)
    if np.any(full == 0.0):
        raise ZeroDispersionError("full-group dispersion is zero at some date")
    keep = [i for i, c in enumerate(countries) if c != country]
    sub_countries = [countries[i] for i in keep]
    sub = _dispersion_values(x[:, keep], dates, sub_countries, weights)
    return CostSeries(country=country, dates=tuple(dates),
                      values=_frozen((sub - full) / full), shock_kind=kind)


# --------------------------------------------------------------------------
# trend filtering
# --------------------------------------------------------------------------

def hp_filter(values: np.ndarray, smoothing: float = 14400.0):
    """Split a series into trend and cycle.

    The trend solves ``(I + smoothing * D'D) trend = values`` with ``D`` the
    second-difference operator, assembled directly in symmetric banded form
    and solved with a banded Cholesky routine.
    """
    y = np.asarray(values, dtype=np.float64)
    if y.ndim != 1:
        raise ValueError("values must be 1-D")
    n = y.size
    if n < 4:
        raise TooShortError("HP filter needs at least 4 observations")
    if smoothing < 0:
        raise ValueError("smoothing must be >= 0")
    if smoothing == 0:
        trend = y.copy()
        return trend, y - trend

    diag0 = np.full(n, 6.0)
    diag0[[0, -1]] = 1.0
    diag0[[1, -2]] = 5.0
    diag1 = np.full(n - 1, -4.0)
    diag1[[0, -1]] = -2.0
    diag2 = np.ones(n - 2)

    ab = np.zeros((3, n))
    ab[0, 2:] = smoothing * diag2
    ab[1, 1:] = smoothing * diag1
    ab[2, :] = 1.0 + smoothing * diag0
    trend = slinalg.solveh_banded(ab, y, lower=False)
    return trend, y - trend


def trend_change(dates: Sequence[Month], trend: np.ndarray,
                 start: Month, end: Month) -> float:
    """Percent change of the trend between two sample dates."""
    index = {d: i for i, d in enumerate(dates)}
    if start not in index or end not in index:
        raise DateRangeError(f"dates must lie within {dates[0]}..{dates[-1]}")
    base = float(trend[index[start]])
    if base == 0.0:
        raise ZeroBaseError(f"trend value at {start} is zero")
    return 100.0 * (float(trend[index[end]]) - base) / base
