"""Augmented Dickey-Fuller testing and integration-order classification.

The test regresses the first difference on the lagged level, optional
deterministic terms and ``k`` lagged differences; the statistic is the
t-ratio on the lagged level.  Critical values come from an embedded
response surface in the effective sample size (constants as published by
MacKinnon, 2010), so any sample length is handled without tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import _kernels
from .errors import DegenerateRegressorError, InconclusiveIntegrationError, TooShortError

SPEC_CODES = {"none": 0, "constant": 1, "trend": 2}
_SPEC_ALIASES = {"constant+trend": "trend", "ct": "trend", "c": "constant",
                 "nc": "none", "n": "none"}
LEVELS = (0.01, 0.05, 0.10)

# response-surface coefficients: cv = b0 + b1/T + b2/T^2 + b3/T^3,
# rows ordered 1%, 5%, 10%
_CV_SURFACE = {
    "none": np.array([
        [-2.56574, -2.2358, -3.627, 0.0],
        [-1.94100, -0.2686, -3.365, 31.223],
        [-1.61682, 0.2656, -2.714, 25.364],
    ]),
    "constant": np.array([
        [-3.43035, -6.5393, -16.786, -79.433],
        [-2.86154, -2.8903, -4.234, -40.040],
        [-2.56677, -1.5384, -2.809, 0.0],
    ]),
    "trend": np.array([
        [-3.95877, -9.0531, -28.428, -134.155],
        [-3.41049, -4.3904, -9.036, -45.374],
        [-3.12705, -2.5856, -3.925, -22.380],
    ]),
}

MIN_EFFECTIVE_OBS = 20


def canonical_spec(spec: str) -> str:
    spec = spec.strip().lower()
    spec = _SPEC_ALIASES.get(spec, spec)
    if spec not in SPEC_CODES:
        raise ValueError(f"unknown deterministic spec {spec!r}")
    return spec


def critical_values(spec: str, nobs: int) -> dict[float, float]:
    """Finite-sample critical values for the given effective sample size."""
    surface = _CV_SURFACE[canonical_spec(spec)]
    t = float(nobs)
    cvs = surface[:, 0] + surface[:, 1] / t + surface[:, 2] / t**2 + surface[:, 3] / t**3
    return dict(zip(LEVELS, cvs.tolist()))


@dataclass(frozen=True)
class AdfResult:
    """Outcome of one unit-root regression."""

    statistic: float
    lags_used: int
    spec: str
    nobs: int
    critical_values: Mapping[float, float]
    reject_at: float | None

    def as_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "lags_used": self.lags_used,
            "spec": self.spec,
            "nobs": self.nobs,
            "critical_values": {f"{int(level * 100)}%": cv
                                for level, cv in self.critical_values.items()},
            "reject_at": self.reject_at,
        }


@dataclass(frozen=True)
class IntegrationResult:
    order: int
    trail: tuple[AdfResult, ...]


def adf_test(series: np.ndarray, spec: str = "trend", max_lags: int = 12,
             lag_rule: int | str = "aic") -> AdfResult:
    """Unit-root t-test with the null of a unit root.

    ``lag_rule`` is either ``"aic"`` (lag count chosen over ``0..max_lags``)
    or an integer fixing the augmentation lag count.
    """
    series = np.asarray(series, dtype=np.float64)
    spec = canonical_spec(spec)
    if series.ndim != 1:
        raise ValueError("series must be 1-D")
    if np.ptp(series) == 0.0:
        raise DegenerateRegressorError("series is constant")

    if isinstance(lag_rule, str):
        if lag_rule.lower() != "aic":
            raise ValueError(f"unknown lag rule {lag_rule!r}")
        autolag, k = True, int(max_lags)
    else:
        autolag, k = False, int(lag_rule)
        if k < 0:
            raise ValueError("fixed lag count must be >= 0")

    effective = series.size - 1 - k
    if effective < MIN_EFFECTIVE_OBS:
        raise TooShortError(
            f"need >= {MIN_EFFECTIVE_OBS} effective observations, have {effective}")

    stats, lags, nobs = _kernels.adf_batch(series[None, :], SPEC_CODES[spec], k, autolag)
    statistic = float(stats[0])
    if not np.isfinite(statistic):
        raise DegenerateRegressorError("regression is numerically degenerate")
    cvs = critical_values(spec, int(nobs[0]))
    reject_at = next((level for level in LEVELS if statistic < cvs[level]), None)
    return AdfResult(statistic=statistic, lags_used=int(lags[0]), spec=spec,
                     nobs=int(nobs[0]), critical_values=cvs, reject_at=reject_at)


def integration_order(series: np.ndarray, spec: str = "trend", max_order: int = 2,
                      max_lags: int = 12, lag_rule: int | str = "aic") -> IntegrationResult:
    """Smallest differencing order whose ADF test rejects at the 5% level."""
    current = np.asarray(series, dtype=np.float64)
    trail: list[AdfResult] = []
    for order in range(max_order + 1):
        result = adf_test(current, spec=spec, max_lags=max_lags, lag_rule=lag_rule)
        trail.append(result)
        if result.reject_at is not None and result.reject_at <= 0.05:
            return IntegrationResult(order=order, trail=tuple(trail))
        current = np.diff(current)
    raise InconclusiveIntegrationError(
        f"no rejection at 5% up to differencing order {max_order}", trail=trail)
