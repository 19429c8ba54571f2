import numpy as np
import pytest

from ocametrics.errors import LagWindowError, NoAdmissibleLagError, RankDeficientError, TooShortError
from ocametrics.months import Month, month_range
from ocametrics.simulate import Dgp, simulate
from ocametrics.var import (
    DummySpec,
    VarModel,
    arch_lm_test,
    companion_matrix,
    fit_var,
    portmanteau_test,
    select_lag,
    stability,
)

from .conftest import make_pair


def _simulated_pair(coefs, seed, n_obs, lower=((1.0, 0.0), (0.0, 1.0)),
                    intercept=(0.0, 0.0)):
    # a valid impact matrix follows from any lower-triangular long-run target
    coefs = np.asarray(coefs, dtype=float)
    impact = (np.eye(2) - coefs.sum(axis=0)) @ np.asarray(lower, dtype=float)
    dgp = Dgp(coefs=coefs, impact=impact,
              intercept=np.asarray(intercept, dtype=float), n_obs=n_obs, seed=seed)
    return make_pair(simulate(dgp).diffs)


class TestFitVar:
    def test_recovers_known_var1(self):
        b1 = np.array([[0.5, 0.0], [0.0, 0.3]])
        data = _simulated_pair([b1], seed=77, n_obs=10_000)
        model = fit_var(data, p=1)
        np.testing.assert_allclose(model.coefs[0], b1, atol=0.02)

    def test_white_noise_coefficients_within_three_stderr(self):
        hits = 0
        reps = 200
        for seed in range(reps):
            rng = np.random.default_rng(3000 + seed)
            data = make_pair(rng.standard_normal((300, 2)))
            model = fit_var(data, p=1)
            # independent OLS oracle for the standard errors
            y = np.column_stack([data[0].values, data[1].values])
            X = np.column_stack([np.ones(299), y[:-1]])
            xtx_inv = np.linalg.inv(X.T @ X)
            ok = True
            for a in range(2):
                beta = xtx_inv @ (X.T @ y[1:, a])
                resid = y[1:, a] - X @ beta
                s2 = resid @ resid / (299 - 3)
                se = np.sqrt(s2 * np.diag(xtx_inv))
                lag_coef = model.coefs[0][a]
                lag_se = se[1:]
                ok &= bool(np.all(np.abs(lag_coef) < 3.0 * lag_se))
            hits += ok
        assert hits / reps >= 0.95

    def test_sigma_matches_accumulation_oracle(self):
        data = _simulated_pair([np.array([[0.4, 0.1], [0.0, 0.2]])],
                               seed=5, n_obs=500, lower=[[1.0, 0.0], [0.4, 0.8]])
        model = fit_var(data, p=2)
        acc = np.zeros((2, 2))
        for row in model.residuals:
            acc += np.outer(row, row)
        acc /= model.residuals.shape[0]
        np.testing.assert_allclose(model.sigma, acc, atol=1e-12)
        np.testing.assert_allclose(model.sigma, model.sigma.T, atol=1e-15)

    def test_residuals_orthogonal_to_regressors(self):
        data = _simulated_pair([np.array([[0.3, 0.2], [0.1, 0.4]])],
                               seed=6, n_obs=800)
        model = fit_var(data, p=3)
        y = np.column_stack([data[0].values, data[1].values])
        rows = y.shape[0] - 3
        X = np.column_stack([np.ones(rows)]
                            + [y[3 - 1 - i:y.shape[0] - 1 - i] for i in range(3)])
        cross = X.T @ model.residuals
        assert np.abs(cross).max() / rows < 1e-8

    def test_sigma_divisor_switch(self):
        data = _simulated_pair([np.array([[0.3, 0.0], [0.0, 0.3]])],
                               seed=8, n_obs=200)
        ml = fit_var(data, p=1, sigma_divisor="ml")
        df = fit_var(data, p=1, sigma_divisor="df")
        rows = ml.nobs
        np.testing.assert_allclose(df.sigma, ml.sigma * rows / (rows - 3), rtol=1e-12)
        with pytest.raises(ValueError):
            fit_var(data, p=1, sigma_divisor="unbiased")

    def test_residual_row_count_and_dates(self):
        data = _simulated_pair([np.zeros((2, 2))], seed=1, n_obs=120)
        model = fit_var(data, p=4)
        assert model.nobs == 116
        assert model.effective_dates == data[0].dates[4:]

    def test_zero_variance_input_is_rank_deficient(self):
        data = make_pair(np.ones((80, 2)))
        with pytest.raises(RankDeficientError):
            fit_var(data, p=1)

    def test_too_short(self):
        data = make_pair(np.random.default_rng(0).standard_normal((14, 2)))
        with pytest.raises(TooShortError):
            fit_var(data, p=2)

    def test_consistency_error_shrinks_with_sample(self):
        b1 = np.array([[0.5, 0.1], [0.0, 0.3]])
        medians = []
        for n_obs in (500, 5_000, 50_000):
            errors = []
            for seed in range(15):
                data = _simulated_pair([b1], seed=9000 + seed, n_obs=n_obs)
                model = fit_var(data, p=1)
                errors.append(np.abs(model.coefs[0] - b1).max())
            medians.append(np.median(errors))
        assert medians[0] > medians[1] > medians[2]


class TestDummies:
    def test_step_dummy_absorbs_level_shift(self):
        rng = np.random.default_rng(21)
        values = rng.standard_normal((200, 2)) * 0.1
        dates = month_range(Month(2009, 2), 200)
        break_date = dates[120]
        shift = np.array([d >= break_date for d in dates], dtype=float)
        values[:, 0] += 0.5 * shift
        data = make_pair(values)
        spec = DummySpec(variable="activity", break_date=break_date, form="step")
        model = fit_var(data, p=1, dummies=[spec])
        assert abs(model.exog_coefficients[0, 0] - 0.5) < 0.1
        assert abs(model.exog_coefficients[1, 0]) < 0.1

    def test_equation_override_zeroes_other_row(self):
        rng = np.random.default_rng(22)
        data = make_pair(rng.standard_normal((150, 2)))
        spec = DummySpec(variable="activity", break_date=data[0].dates[75],
                         form="pulse", equations="activity")
        model = fit_var(data, p=1, dummies=[spec])
        assert model.exog_coefficients[1, 0] == 0.0
        assert model.exog_coefficients[0, 0] != 0.0

    def test_break_outside_sample_rejected(self):
        data = make_pair(np.random.default_rng(0).standard_normal((100, 2)))
        from ocametrics.errors import DateRangeError
        spec = DummySpec(variable="price", break_date=Month(1990, 1))
        with pytest.raises(DateRangeError):
            fit_var(data, p=1, dummies=[spec])

    def test_invalid_spec_fields(self):
        with pytest.raises(ValueError):
            DummySpec(variable="gdp", break_date=Month(2010, 1))
        with pytest.raises(ValueError):
            DummySpec(variable="price", break_date=Month(2010, 1), form="ramp")


class TestStability:
    def test_diagonal_case(self):
        data = _simulated_pair([np.array([[0.5, 0.0], [0.0, 0.3]])],
                               seed=2, n_obs=5000)
        model = fit_var(data, p=1)
        res = stability(model)
        assert res.stable
        np.testing.assert_allclose(res.moduli, (0.5, 0.3), atol=0.03)

    def test_unit_root_not_stable(self):
        model = _manual_model(coefs=np.eye(2)[None, :, :])
        res = stability(model)
        assert not res.stable
        assert abs(res.max_modulus - 1.0) < 1e-12

    def test_triangular_case(self):
        model = _manual_model(coefs=np.array([[[0.9, 0.5], [0.0, 0.9]]]))
        res = stability(model)
        assert res.stable
        np.testing.assert_allclose(res.moduli, (0.9, 0.9), atol=1e-12)

    def test_companion_shape(self):
        coefs = np.zeros((3, 2, 2))
        assert companion_matrix(coefs).shape == (6, 6)

    def test_flag_agrees_with_explicit_simulation(self):
        from ocametrics._kernels import var_simulate

        stable_coefs = np.array([[[0.7, 0.1], [0.0, 0.6]]])
        unstable_coefs = np.array([[[1.05, 0.0], [0.0, 0.2]]])
        assert stability(_manual_model(stable_coefs)).stable
        assert not stability(_manual_model(unstable_coefs)).stable
        magnitudes = {}
        for name, coefs in (("stable", stable_coefs), ("unstable", unstable_coefs)):
            finals = []
            for seed in range(21):
                shocks = np.random.default_rng(seed).standard_normal((500, 2))
                path = var_simulate(coefs, np.zeros(2), shocks)
                finals.append(np.abs(path[-1]).max())
            magnitudes[name] = np.median(finals)
        assert magnitudes["unstable"] / magnitudes["stable"] > 1e6


def _manual_model(coefs, residuals=None, sigma=None, p=None):
    coefs = np.asarray(coefs, dtype=float)
    p = p or coefs.shape[0]
    if residuals is None:
        residuals = np.random.default_rng(0).standard_normal((200, 2))
    if sigma is None:
        sigma = residuals.T @ residuals / residuals.shape[0]
    dates = month_range(Month(2009, 2 + p), residuals.shape[0])
    return VarModel(p=p, intercept=np.zeros(2), coefs=coefs, dummies=(),
                    exog_coefficients=np.zeros((2, 0)), residuals=residuals,
                    sigma=np.asarray(sigma, dtype=float), effective_dates=dates)


class TestPortmanteau:
    def test_h_must_exceed_p(self):
        model = _manual_model(np.zeros((3, 2, 2)))
        with pytest.raises(LagWindowError):
            portmanteau_test(model, h=3)
        with pytest.raises(LagWindowError):
            portmanteau_test(model, h=model.residuals.shape[0])

    def test_size_on_fitted_white_noise(self):
        reps = 5000
        rejections = 0
        dates = month_range(Month(2009, 2), 1000)
        from ocametrics.panel import TransformedSeries
        for seed in range(reps):
            rng = np.random.default_rng(40_000 + seed)
            values = rng.standard_normal((1000, 2))
            data = (TransformedSeries("AAA", "activity", dates, values[:, 0]),
                    TransformedSeries("AAA", "price", dates, values[:, 1]))
            model = fit_var(data, p=1)
            rejections += portmanteau_test(model, h=12).p_value < 0.05
        assert 0.03 <= rejections / reps <= 0.07

    def test_power_against_ar1_residuals(self):
        reps = 300
        rejections = 0
        for seed in range(reps):
            rng = np.random.default_rng(50_000 + seed)
            eps = rng.standard_normal((1000, 2))
            u = np.empty_like(eps)
            u[0] = eps[0]
            for t in range(1, 1000):
                u[t] = 0.5 * u[t - 1] + eps[t]
            model = _manual_model(np.zeros((1, 2, 2)), residuals=u)
            rejections += portmanteau_test(model, h=12).p_value < 0.05
        assert rejections / reps >= 0.95

    def test_df_formula(self):
        model = _manual_model(np.zeros((2, 2, 2)))
        assert portmanteau_test(model, h=12).df == 4 * (12 - 2)

    def test_matches_statsmodels_whiteness(self):
        sm_var = pytest.importorskip("statsmodels.tsa.api").VAR
        y = np.random.default_rng(0).standard_normal((500, 2))
        expected = sm_var(y).fit(1, trend="c").test_whiteness(nlags=12, adjusted=True)
        model = fit_var(make_pair(y), p=1)
        mine = portmanteau_test(model, h=12)
        assert abs(mine.statistic - expected.test_statistic) < 1e-8
        assert mine.df == expected.df
        assert abs(mine.p_value - expected.pvalue) < 1e-10


class TestArchLm:
    def test_size_iid(self):
        reps = 5000
        rejections = 0
        for seed in range(reps):
            u = np.random.default_rng(60_000 + seed).standard_normal(1000)
            rejections += arch_lm_test(u, q=4).p_value < 0.05
        assert 0.03 <= rejections / reps <= 0.07

    def test_power_against_arch1(self):
        reps = 300
        rejections = 0
        for seed in range(reps):
            rng = np.random.default_rng(70_000 + seed)
            z = rng.standard_normal(500)
            u = np.empty(500)
            u[0] = z[0]
            for t in range(1, 500):
                u[t] = z[t] * np.sqrt(1.0 + 0.5 * u[t - 1] ** 2)
            rejections += arch_lm_test(u, q=4).p_value < 0.05
        assert rejections / reps >= 0.90

    def test_constant_residuals_degenerate(self):
        res = arch_lm_test(np.full(100, 2.0), q=4)
        assert res.statistic == 0.0
        assert res.p_value == 1.0

    def test_too_short(self):
        with pytest.raises(TooShortError):
            arch_lm_test(np.ones(20), q=4)


class TestSelectLag:
    def test_sc_recovers_var2_order(self):
        b = np.array([[[0.35, 0.10], [0.05, 0.30]],
                      [[0.25, 0.00], [0.00, 0.25]]])
        hits = 0
        reps = 100
        for seed in range(reps):
            data = _simulated_pair(b, seed=80_000 + seed, n_obs=2000)
            selection = select_lag(data, max_p=6, criteria=("sc",),
                                   diagnostics_gate=False)
            hits += selection.p == 2
        assert hits / reps >= 0.90

    def test_white_noise_passes_gate_at_one(self):
        passed_at_one = 0
        reps = 51
        for seed in range(reps):
            rng = np.random.default_rng(90_000 + seed)
            data = make_pair(rng.standard_normal((300, 2)))
            try:
                selection = select_lag(data, max_p=6)
            except NoAdmissibleLagError:
                continue
            passed_at_one += selection.p == 1
        assert passed_at_one / reps > 0.5

    def test_gate_trail_is_recorded(self):
        data = _simulated_pair([np.array([[0.4, 0.0], [0.0, 0.4]])],
                               seed=4, n_obs=400)
        selection = select_lag(data, max_p=6)
        assert selection.trail[-1].passed
        assert selection.trail[-1].p == selection.p
        assert set(selection.criterion_choices) == {"aic", "sc", "hq"}

    def test_no_admissible_lag_reports_trail(self):
        # strong MA(1) data keeps the serial-correlation check failing for
        # every small lag order
        rng = np.random.default_rng(17)
        eps = rng.standard_normal((501, 2))
        values = eps[1:] + 0.9 * eps[:-1]
        data = make_pair(values)
        with pytest.raises(NoAdmissibleLagError) as excinfo:
            select_lag(data, max_p=2)
        assert len(excinfo.value.trail) >= 1
        assert not excinfo.value.trail[-1].passed

    def test_unknown_criterion_rejected(self):
        data = make_pair(np.random.default_rng(0).standard_normal((100, 2)))
        with pytest.raises(ValueError):
            select_lag(data, criteria=("bic",))
