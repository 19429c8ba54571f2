import math

import numpy as np
import pytest

from ocametrics._kernels import adf_batch
from ocametrics.errors import DegenerateRegressorError, InconclusiveIntegrationError, TooShortError
from ocametrics.unit_root import (
    LEVELS,
    SPEC_CODES,
    AdfResult,
    adf_test,
    critical_values,
    integration_order,
)


def _classic_df_tstat(y):
    """Two-column oracle: regress dy on the lagged level alone."""
    dy = np.diff(y)
    x = y[:-1]
    gamma = float(x @ dy) / float(x @ x)
    resid = dy - gamma * x
    s2 = float(resid @ resid) / (len(dy) - 1)
    return gamma / math.sqrt(s2 / float(x @ x))


class TestAdfTest:
    def test_fixed_zero_lag_none_spec_matches_direct_oracle(self):
        for seed in range(10):
            y = np.random.default_rng(seed).standard_normal(150).cumsum()
            res = adf_test(y, spec="none", lag_rule=0)
            assert abs(res.statistic - _classic_df_tstat(y)) < 1e-10
            assert res.lags_used == 0

    def test_affine_invariance_constant_and_trend(self):
        y = np.random.default_rng(3).standard_normal(160).cumsum()
        for spec in ("constant", "trend"):
            base = adf_test(y, spec=spec)
            shifted = adf_test(7.5 + 3.2 * y, spec=spec)
            assert abs(base.statistic - shifted.statistic) < 1e-8
            assert base.lags_used == shifted.lags_used

    def test_critical_values_ordered_and_reject_at_consistent(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            y = rng.standard_normal(140)
            if rng.uniform() < 0.5:
                y = y.cumsum()
            res = adf_test(y, spec="constant")
            cvs = res.critical_values
            assert cvs[0.01] < cvs[0.05] < cvs[0.10] < 0
            expected = next((lv for lv in LEVELS if res.statistic < cvs[lv]), None)
            assert res.reject_at == expected

    def test_response_surface_matches_statsmodels_constants(self):
        sm_values = pytest.importorskip("statsmodels.tsa.adfvalues")
        for spec, name in (("none", "nc"), ("constant", "c"), ("trend", "ct")):
            table = getattr(sm_values, f"tau_{name}_2010")[0]
            for nobs in (50, 131, 500):
                ours = critical_values(spec, nobs)
                for row, level in enumerate(LEVELS):
                    expected = np.polynomial.polynomial.polyval(1.0 / nobs, table[row])
                    assert abs(ours[level] - expected) < 1e-12

    def test_degenerate_and_short_inputs(self):
        with pytest.raises(DegenerateRegressorError):
            adf_test(np.full(100, 3.0), spec="constant")
        with pytest.raises(TooShortError):
            adf_test(np.arange(15.0), spec="constant", lag_rule=0)

    def test_spec_aliases(self):
        y = np.random.default_rng(0).standard_normal(100).cumsum()
        assert adf_test(y, spec="constant+trend").spec == "trend"
        with pytest.raises(ValueError):
            adf_test(y, spec="quadratic")


class TestMonteCarlo:
    def test_random_walk_rarely_rejected_at_5pct_trend_spec(self):
        rng = np.random.default_rng(2026)
        paths = rng.standard_normal((1000, 133)).cumsum(axis=1)
        stats, _, nobs = adf_batch(paths, SPEC_CODES["trend"], 12, True)
        cv5 = np.array([critical_values("trend", n)[0.05] for n in nobs])
        no_reject = np.mean(stats >= cv5)
        assert no_reject >= 0.90

    def test_trend_stationary_power_at_5pct(self):
        rng = np.random.default_rng(2027)
        t = np.arange(133, dtype=np.float64)
        paths = 0.2 * t + rng.standard_normal((1000, 133))
        stats, _, nobs = adf_batch(paths, SPEC_CODES["trend"], 12, True)
        cv5 = np.array([critical_values("trend", n)[0.05] for n in nobs])
        assert np.mean(stats < cv5) >= 0.90

    def test_size_window_constant_spec(self):
        # 5000-replication smoke check at T=200; the full 10k run is in the
        # acceptance suite
        rng = np.random.default_rng(2028)
        paths = rng.standard_normal((5000, 200)).cumsum(axis=1)
        stats, _, nobs = adf_batch(paths, SPEC_CODES["constant"], 0, False)
        cv5 = critical_values("constant", int(nobs[0]))[0.05]
        rate = np.mean(stats < cv5)
        assert 0.03 <= rate <= 0.07


class TestIntegrationOrder:
    def test_stationary_ar1_is_order_zero_majority(self):
        orders = []
        for seed in range(51):
            rng = np.random.default_rng(1000 + seed)
            eps = rng.standard_normal(134)
            y = np.empty(133)
            y[0] = eps[0]
            for t in range(1, 133):
                y[t] = 0.5 * y[t - 1] + eps[t]
            orders.append(integration_order(y, spec="constant").order)
        assert np.median(orders) == 0

    def test_random_walk_is_order_one_majority(self):
        orders = []
        for seed in range(51):
            y = np.random.default_rng(2000 + seed).standard_normal(133).cumsum()
            orders.append(integration_order(y, spec="constant").order)
        assert np.median(orders) == 1

    def test_trail_records_every_level(self):
        y = np.random.default_rng(5).standard_normal(133).cumsum()
        result = integration_order(y, spec="constant")
        assert len(result.trail) == result.order + 1
        for res in result.trail[:-1]:
            assert res.reject_at is None or res.reject_at > 0.05

    def test_inconclusive_error_carries_trail(self):
        # a quadratic trend keeps rejecting the unit root away at every order
        t = np.arange(160, dtype=np.float64)
        y = (0.5 * t) ** 2
        with pytest.raises(InconclusiveIntegrationError) as excinfo:
            integration_order(y, spec="none", max_order=0, lag_rule=0)
        assert len(excinfo.value.trail) == 1


class TestTableFormatFixture:
    """Star coding for published-shape statistics (format fixture only)."""

    @pytest.mark.parametrize("statistic,expected", [
        (-1.443, None), (-5.678, 0.01), (-3.640, 0.05), (-3.20, 0.10)])
    def test_reject_levels_at_published_magnitudes(self, statistic, expected):
        cvs = critical_values("trend", 131)
        reject_at = next((lv for lv in LEVELS if statistic < cvs[lv]), None)
        assert reject_at == expected
        result = AdfResult(statistic=statistic, lags_used=1, spec="trend",
                           nobs=131, critical_values=cvs, reject_at=reject_at)
        stars = {None: "", 0.01: "***", 0.05: "**", 0.10: "*"}[result.reject_at]
        rendered = f"{result.statistic:.3f}{stars}"
        assert rendered in ("-1.443", "-5.678***", "-3.640**", "-3.200*")
