"""Hot numeric kernels with two interchangeable backends.

The default backend compiles scalar-loop kernels with numba's ``@njit``.
Setting ``OCAMETRICS_DISABLE_NUMBA=1`` (or running without numba installed)
selects a vectorized pure-numpy fallback that batches the same linear
algebra across Monte Carlo replications.  Both backends implement identical
math; ``benchmarks/bench_kernels.py`` times one against the other and the
test suite checks their agreement.

Kernel surface:

``adf_batch(paths, det, max_lags, autolag)``
    Unit-root regression t-ratios for a batch of series.  ``det`` is the
    deterministic spec (0 none, 1 constant, 2 constant + trend).  With
    ``autolag`` the lag count is chosen per series by AIC over
    ``0..max_lags`` on a common sample, then the statistic is recomputed on
    the longest usable sample; otherwise the lag count is ``max_lags``.

``var_simulate(coefs, intercept, shocks)``
    Sequential VAR recursion ``x_t = c + sum_i B_i x_{t-i} + u_t`` with
    zero initial conditions.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE_FLAG = os.environ.get("OCAMETRICS_DISABLE_NUMBA", "").strip()
_WANT_NUMBA = _DISABLE_FLAG not in {"1", "true", "yes"}

if _WANT_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _WANT_NUMBA = False


# --------------------------------------------------------------------------
# numba backend: scalar loops, one replication at a time
# --------------------------------------------------------------------------

def _adf_ols(y, dy, start, rows, k, det):
    # regressand dy[start + t]; regressors: det terms, y[start + t], lagged diffs
    ncol = det + 1 + k
    X = np.empty((rows, ncol))
    z = np.empty(rows)
    for t in range(rows):
        tt = start + t
        j = 0
        if det >= 1:
            X[t, j] = 1.0
            j += 1
        if det >= 2:
            X[t, j] = float(t + 1)
            j += 1
        X[t, j] = y[tt]
        j += 1
        for i in range(k):
            X[t, j] = dy[tt - 1 - i]
            j += 1
        z[t] = dy[tt]
    XtX = X.T @ X
    XtXinv = np.linalg.inv(XtX)
    beta = XtXinv @ (X.T @ z)
    resid = z - X @ beta
    rss = resid @ resid
    s2 = rss / (rows - ncol)
    tstat = beta[det] / np.sqrt(s2 * XtXinv[det, det])
    return tstat, rss


def _adf_batch_loop(paths, det, max_lags, autolag):
    n_rep, n_obs = paths.shape
    stats = np.empty(n_rep)
    lags = np.empty(n_rep, dtype=np.int64)
    nobs = np.empty(n_rep, dtype=np.int64)
    nd = n_obs - 1
    for r in range(n_rep):
        y = paths[r]
        dy = y[1:] - y[:-1]
        if autolag:
            rows_c = nd - max_lags
            best_ic = np.inf
            best_k = 0
            for k in range(max_lags + 1):
                _, rss = _adf_ols(y, dy, max_lags, rows_c, k, det)
                ic = rows_c * np.log(rss / rows_c) + 2.0 * (det + 1 + k)
                if ic < best_ic:
                    best_ic = ic
                    best_k = k
            k = best_k
        else:
            k = max_lags
        rows = nd - k
        tstat, _ = _adf_ols(y, dy, k, rows, k, det)
        stats[r] = tstat
        lags[r] = k
        nobs[r] = rows
    return stats, lags, nobs


def _var_simulate_loop(coefs, intercept, shocks):
    p = coefs.shape[0]
    n_obs, n_var = shocks.shape
    x = np.zeros((n_obs, n_var))
    for t in range(n_obs):
        for a in range(n_var):
            acc = intercept[a] + shocks[t, a]
            for i in range(p):
                if t - 1 - i >= 0:
                    for b in range(n_var):
                        acc += coefs[i, a, b] * x[t - 1 - i, b]
            x[t, a] = acc
    return x


# --------------------------------------------------------------------------
# numpy backend: the same regressions batched across replications
# --------------------------------------------------------------------------

def _adf_design(paths, det, max_lags, start, rows):
    # stacked design (n_rep, rows, det + 1 + max_lags) and regressand
    n_rep = paths.shape[0]
    dy = np.diff(paths, axis=1)
    cols = [np.broadcast_to(np.ones(rows), (n_rep, rows))]
    if det >= 2:
        trend = np.arange(1.0, rows + 1.0)
        cols.append(np.broadcast_to(trend, (n_rep, rows)))
    if det == 0:
        cols = []
    cols.append(paths[:, start:start + rows])
    for i in range(max_lags):
        cols.append(dy[:, start - 1 - i:start - 1 - i + rows])
    X = np.stack(cols, axis=2)
    z = dy[:, start:start + rows]
    return X, z


def _adf_stats_vec(X, z, det):
    # batched OLS t-ratio on the level column (index det)
    ncol = X.shape[2]
    rows = X.shape[1]
    Xt = X.transpose(0, 2, 1)
    XtX = Xt @ X
    Xtz = Xt @ z[:, :, None]
    XtXinv = np.linalg.inv(XtX)
    beta = XtXinv @ Xtz
    resid = z - (X @ beta)[:, :, 0]
    rss = np.einsum("ij,ij->i", resid, resid)
    s2 = rss / (rows - ncol)
    tstat = beta[:, det, 0] / np.sqrt(s2 * XtXinv[:, det, det])
    return tstat, rss


def _adf_batch_vec(paths, det, max_lags, autolag):
    n_rep, n_obs = paths.shape
    nd = n_obs - 1
    if autolag:
        rows_c = nd - max_lags
        Xfull, z = _adf_design(paths, det, max_lags, max_lags, rows_c)
        best_ic = np.full(n_rep, np.inf)
        best_k = np.zeros(n_rep, dtype=np.int64)
        for k in range(max_lags + 1):
            _, rss = _adf_stats_vec(Xfull[:, :, :det + 1 + k], z, det)
            ic = rows_c * np.log(rss / rows_c) + 2.0 * (det + 1 + k)
            better = ic < best_ic
            best_ic = np.where(better, ic, best_ic)
            best_k = np.where(better, k, best_k)
        lags = best_k
    else:
        lags = np.full(n_rep, max_lags, dtype=np.int64)
    stats = np.empty(n_rep)
    nobs = np.empty(n_rep, dtype=np.int64)
    for k in np.unique(lags):
        sel = np.flatnonzero(lags == k)
        rows = nd - k
        X, z = _adf_design(paths[sel], det, int(k), int(k), rows)
        tstat, _ = _adf_stats_vec(X, z, det)
        stats[sel] = tstat
        nobs[sel] = rows
    return stats, lags, nobs


def _var_simulate_vec(coefs, intercept, shocks):
    p = coefs.shape[0]
    n_obs = shocks.shape[0]
    x = np.zeros_like(shocks)
    for t in range(n_obs):
        acc = intercept + shocks[t]
        for i in range(min(p, t)):
            acc = acc + coefs[i] @ x[t - 1 - i]
        x[t] = acc
    return x


# --------------------------------------------------------------------------
# backend selection
# --------------------------------------------------------------------------

if _WANT_NUMBA:
    _adf_ols = njit(cache=True)(_adf_ols)
    _adf_batch_loop = njit(cache=True)(_adf_batch_loop)
    _var_simulate_loop = njit(cache=True)(_var_simulate_loop)
    BACKEND = "numba"
    _adf_batch_impl = _adf_batch_loop
    _var_simulate_impl = _var_simulate_loop
else:
    BACKEND = "numpy"
    _adf_batch_impl = _adf_batch_vec
    _var_simulate_impl = _var_simulate_vec


def adf_batch(paths: np.ndarray, det: int, max_lags: int, autolag: bool):
    """t-ratios, lag counts and effective sample sizes for a batch of series."""
    paths = np.ascontiguousarray(paths, dtype=np.float64)
    if paths.ndim != 2:
        raise ValueError("paths must be 2-D (replications x observations)")
    return _adf_batch_impl(paths, int(det), int(max_lags), bool(autolag))


def var_simulate(coefs: np.ndarray, intercept: np.ndarray, shocks: np.ndarray) -> np.ndarray:
    """Run the VAR recursion over a pre-drawn shock matrix."""
    coefs = np.ascontiguousarray(coefs, dtype=np.float64)
    intercept = np.ascontiguousarray(intercept, dtype=np.float64)
    shocks = np.ascontiguousarray(shocks, dtype=np.float64)
    return _var_simulate_impl(coefs, intercept, shocks)
