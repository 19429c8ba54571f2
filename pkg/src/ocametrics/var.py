"""Reduced-form VAR estimation, lag selection and residual diagnostics.

Estimation is equation-by-equation OLS on ``[1, X_{t-1}, ..., X_{t-p}]``
plus optional break-dummy columns.  The residual covariance uses the
maximum-likelihood divisor (the residual row count), which is what the
long-run identification algebra downstream expects.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import stats as sstats

from .errors import (
    DateRangeError,
    LagWindowError,
    NoAdmissibleLagError,
    RankDeficientError,
    TooShortError,
)
from .months import Month
from .panel import TransformedSeries, _frozen

VARIABLE_ORDER = ("activity", "price")
N_VARS = 2


@dataclass(frozen=True)
class DummySpec:
    """Exogenous break dummy.

    ``variable`` records which series' break the dummy marks; ``equations``
    controls which equations receive the column (``both`` by default).
    ``form`` is ``step`` (one from the break date onward) or ``pulse``
    (one only at the break date).
    """

    variable: str
    break_date: Month
    form: str = "step"
    equations: str = "both"

    def __post_init__(self):
        if self.variable not in VARIABLE_ORDER:
            raise ValueError(f"unknown variable {self.variable!r}")
        if self.form not in ("step", "pulse"):
            raise ValueError(f"unknown dummy form {self.form!r}")
        if self.equations not in ("both",) + VARIABLE_ORDER:
            raise ValueError(f"unknown equations selector {self.equations!r}")

    def column(self, dates: Sequence[Month]) -> np.ndarray:
        if not (dates[0] <= self.break_date <= dates[-1]):
            raise DateRangeError(f"break date {self.break_date} outside sample")
        if self.form == "step":
            return np.array([1.0 if d >= self.break_date else 0.0 for d in dates])
        return np.array([1.0 if d == self.break_date else 0.0 for d in dates])

    def label(self) -> str:
        return f"{self.variable}:{self.break_date}:{self.form}"


@dataclass(frozen=True)
class VarModel:
    p: int
    intercept: np.ndarray = field(repr=False)
    coefs: np.ndarray = field(repr=False)            # (p, 2, 2)
    dummies: tuple[DummySpec, ...]
    exog_coefficients: np.ndarray = field(repr=False)  # (2, n_dummies)
    residuals: np.ndarray = field(repr=False)          # (T - p, 2)
    sigma: np.ndarray = field(repr=False)
    effective_dates: tuple[Month, ...]

    @property
    def nobs(self) -> int:
        return self.residuals.shape[0]


@dataclass(frozen=True)
class StabilityResult:
    moduli: tuple[float, ...]
    stable: bool

    @property
    def max_modulus(self) -> float:
        return self.moduli[0]


@dataclass(frozen=True)
class PortmanteauResult:
    statistic: float
    df: int
    p_value: float


@dataclass(frozen=True)
class ArchLmResult:
    statistic: float
    df: int
    p_value: float


@dataclass(frozen=True)
class LagAudit:
    p: int
    stable: bool
    max_modulus: float
    portmanteau_h: int
    portmanteau_pvalue: float
    arch_pvalues: tuple[float, float]
    passed: bool


@dataclass(frozen=True)
class LagSelection:
    p: int
    criterion_choices: Mapping[str, int]
    trail: tuple[LagAudit, ...]


def _check_pair(data: tuple[TransformedSeries, TransformedSeries]):
    first, second = data
    if (first.variable, second.variable) != VARIABLE_ORDER:
        raise ValueError("data must be the (activity, price) pair, in that order")
    if first.dates != second.dates:
        raise ValueError("the two series must share their calendar")
    return np.column_stack([first.values, second.values]), first.dates


def _design(y: np.ndarray, dates: Sequence[Month], p: int,
            dummies: Sequence[DummySpec]):
    n_obs = y.shape[0]
    rows = n_obs - p
    lag_cols = [y[p - 1 - i:n_obs - 1 - i] for i in range(p)]
    X = np.column_stack([np.ones(rows)] + lag_cols
                        + [d.column(dates)[p:] for d in dummies])
    return X, y[p:], tuple(dates[p:])


def _equation_columns(n_base: int, dummies: Sequence[DummySpec], variable: str):
    cols = list(range(n_base))
    for j, d in enumerate(dummies):
        if d.equations in ("both", variable):
            cols.append(n_base + j)
    return cols


def fit_var(data: tuple[TransformedSeries, TransformedSeries], p: int,
            dummies: Sequence[DummySpec] = (),
            sigma_divisor: str = "ml") -> VarModel:
    """OLS fit of a bivariate VAR(p) with optional exogenous dummies.

    ``sigma_divisor`` picks the residual-covariance denominator: ``"ml"``
    (residual row count, what the long-run identification expects) or
    ``"df"`` (rows minus regressors per equation).
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if sigma_divisor not in ("ml", "df"):
        raise ValueError(f"unknown sigma divisor {sigma_divisor!r}")
    y, dates = _check_pair(data)
    dummies = tuple(dummies)
    n_base = 1 + N_VARS * p
    n_reg = n_base + len(dummies)
    rows = y.shape[0] - p
    if rows < 10 + n_reg:
        raise TooShortError(
            f"need at least {10 + n_reg} effective observations for p={p}, have {rows}")

    X, z, eff_dates = _design(y, dates, p, dummies)

    intercept = np.empty(N_VARS)
    coefs = np.zeros((p, N_VARS, N_VARS))
    exog = np.zeros((N_VARS, len(dummies)))
    resid = np.empty((rows, N_VARS))
    for a, variable in enumerate(VARIABLE_ORDER):
        cols = _equation_columns(n_base, dummies, variable)
        Xa = X[:, cols]
        if np.linalg.matrix_rank(Xa) < Xa.shape[1]:
            raise RankDeficientError(f"regressor matrix rank-deficient in {variable} equation")
        beta, *_ = np.linalg.lstsq(Xa, z[:, a], rcond=None)
        resid[:, a] = z[:, a] - Xa @ beta
        intercept[a] = beta[0]
        for i in range(p):
            coefs[i, a, :] = beta[1 + N_VARS * i:1 + N_VARS * (i + 1)]
        for pos, col in enumerate(cols[n_base:]):
            exog[a, col - n_base] = beta[n_base + pos]

    divisor = rows if sigma_divisor == "ml" else rows - n_reg
    sigma = resid.T @ resid / divisor
    sigma = (sigma + sigma.T) / 2.0
    return VarModel(p=p, intercept=_frozen(intercept), coefs=_frozen(coefs),
                    dummies=dummies, exog_coefficients=_frozen(exog),
                    residuals=_frozen(resid), sigma=_frozen(sigma),
                    effective_dates=eff_dates)


def companion_matrix(coefs: np.ndarray) -> np.ndarray:
    p = coefs.shape[0]
    top = np.hstack([coefs[i] for i in range(p)])
    if p == 1:
        return top
    lower = np.hstack([np.eye(N_VARS * (p - 1)),
                       np.zeros((N_VARS * (p - 1), N_VARS))])
    return np.vstack([top, lower])


def stability(model: VarModel) -> StabilityResult:
    """Companion-matrix eigenvalue moduli, descending; stable iff all < 1."""
    moduli = np.abs(np.linalg.eigvals(companion_matrix(model.coefs)))
    moduli = np.sort(moduli)[::-1]
    return StabilityResult(moduli=tuple(float(m) for m in moduli),
                           stable=bool(moduli[0] < 1.0))


def portmanteau_test(model: VarModel, h: int) -> PortmanteauResult:
    """Adjusted multivariate portmanteau test for residual serial correlation."""
    if h <= model.p:
        raise LagWindowError(f"h must exceed the VAR order (h={h}, p={model.p})")
    u = model.residuals
    t_eff = u.shape[0]
    if h >= t_eff:
        raise LagWindowError(f"h={h} must be below the residual count {t_eff}")
    c0 = u.T @ u / t_eff
    c0_inv = np.linalg.inv(c0)
    stat = 0.0
    for j in range(1, h + 1):
        cj = u[j:].T @ u[:-j] / t_eff
        stat += np.trace(cj.T @ c0_inv @ cj @ c0_inv) / (t_eff - j)
    stat *= t_eff**2
    df = N_VARS**2 * (h - model.p)
    return PortmanteauResult(statistic=float(stat), df=int(df),
                             p_value=float(sstats.chi2.sf(stat, df)))


def arch_lm_test(residuals: np.ndarray, q: int) -> ArchLmResult:
    """LM test for autoregressive conditional heteroskedasticity."""
    u = np.asarray(residuals, dtype=np.float64)
    if u.ndim != 1:
        raise ValueError("residuals must be a single equation's series")
    if q < 1:
        raise ValueError("q must be >= 1")
    if u.size <= 5 * q:
        raise TooShortError(f"need more than {5 * q} residuals, have {u.size}")
    u2 = u * u
    z = u2[q:]
    n = z.size
    X = np.column_stack([np.ones(n)] + [u2[q - 1 - i:q - 1 - i + n] for i in range(q)])
    tss = float(((z - z.mean()) ** 2).sum())
    if tss == 0.0:
        return ArchLmResult(statistic=0.0, df=q, p_value=1.0)
    beta, *_ = np.linalg.lstsq(X, z, rcond=None)
    rss = float(((z - X @ beta) ** 2).sum())
    r2 = max(0.0, 1.0 - rss / tss)
    stat = n * r2
    return ArchLmResult(statistic=float(stat), df=int(q),
                        p_value=float(sstats.chi2.sf(stat, q)))


_IC_NAMES = ("aic", "sc", "hq")


def _information_criteria(data, max_p: int, criteria, dummies) -> dict[str, int]:
    y, dates = _check_pair(data)
    t_common = y.shape[0] - max_p
    if t_common < 10 + 1 + N_VARS * max_p + len(dummies):
        raise TooShortError(f"sample too short for lag search up to {max_p}")
    penalties = {
        "aic": 2.0,
        "sc": float(np.log(t_common)),
        "hq": 2.0 * float(np.log(np.log(t_common))),
    }
    values: dict[str, list[float]] = {c: [] for c in criteria}
    for p in range(1, max_p + 1):
        offset = max_p - p
        X, z, _ = _design(y[offset:], dates[offset:], p, dummies)
        beta, *_ = np.linalg.lstsq(X, z, rcond=None)
        resid = z - X @ beta
        sigma = resid.T @ resid / t_common
        _, logdet = np.linalg.slogdet(sigma)
        n_params = N_VARS * (1 + N_VARS * p + len(dummies))
        for c in criteria:
            values[c].append(logdet + penalties[c] * n_params / t_common)
    return {c: int(np.argmin(values[c])) + 1 for c in criteria}


def select_lag(data: tuple[TransformedSeries, TransformedSeries], max_p: int = 12,
               criteria: Sequence[str] = _IC_NAMES, diagnostics_gate: bool = True,
               dummies: Sequence[DummySpec] = (), portmanteau_h: int = 12,
               arch_q: int = 4, alpha: float = 0.05) -> LagSelection:
    """Sequential lag-order choice.

    Starts from the most parsimonious of the information-criterion picks
    and, when ``diagnostics_gate`` is on, walks upward until the fitted
    model is stable and passes the serial-correlation and
    heteroskedasticity checks at ``alpha``.
    """
    if max_p < 1:
        raise ValueError("max_p must be >= 1")
    criteria = tuple(c.lower() for c in criteria)
    for c in criteria:
        if c not in _IC_NAMES:
            raise ValueError(f"unknown criterion {c!r}")
    choices = _information_criteria(data, max_p, criteria, tuple(dummies))
    start = min(choices.values())
    if not diagnostics_gate:
        return LagSelection(p=start, criterion_choices=choices, trail=())

    trail: list[LagAudit] = []
    for p in range(start, max_p + 1):
        model = fit_var(data, p, dummies)
        stab = stability(model)
        h_eff = max(portmanteau_h, p + 1)
        port = portmanteau_test(model, h_eff)
        arch = tuple(arch_lm_test(model.residuals[:, a], arch_q).p_value
                     for a in range(N_VARS))
        passed = stab.stable and port.p_value > alpha and all(pa > alpha for pa in arch)
        trail.append(LagAudit(p=p, stable=stab.stable, max_modulus=stab.max_modulus,
                              portmanteau_h=h_eff, portmanteau_pvalue=port.p_value,
                              arch_pvalues=arch, passed=passed))
        if passed:
            return LagSelection(p=p, criterion_choices=choices, trail=tuple(trail))
    raise NoAdmissibleLagError(
        f"no lag order in [{start}, {max_p}] passes the diagnostic gate",
        trail=trail)
