import numpy as np
import pytest

from hereditas.selectors import (
    LassoOptions,
    fit_lasso_path,
    lambda_path,
    lasso_fit,
    lasso_kkt_residual,
    lasso_objective,
    ols_fit,
    tune_lasso,
)


def random_problem(rng, n=40, m=6, snr=3.0):
    x = rng.standard_normal((n, m)) + rng.uniform(-1, 1, m)
    beta = rng.standard_normal(m)
    y = x @ beta + rng.standard_normal(n) * np.linalg.norm(x @ beta) / (snr * np.sqrt(n))
    return x, y


def orthonormal_problem(rng, n=64, m=5):
    """Columns with exact zero mean and X'X/n = I, so the lasso solution has
    the closed form soft(x_j'y/n, lam) coordinatewise."""
    a = rng.standard_normal((n, m))
    a -= a.mean(axis=0)
    q, _ = np.linalg.qr(a)  # columns stay in the centered subspace
    x = q * np.sqrt(n)
    y = rng.standard_normal(n) * 2.0 + x @ rng.standard_normal(m)
    return x, y


class TestLassoFit:
    def test_lambda_zero_matches_ols(self):
        rng = np.random.default_rng(10)
        for _ in range(5):
            x, y = random_problem(rng)
            fit = lasso_fit(x, y, 0.0)
            icept, coefs, _ = ols_fit(x, y)
            np.testing.assert_allclose(fit.coefs.values, coefs, atol=1e-6)
            assert fit.coefs.intercept == pytest.approx(icept, abs=1e-6)
            assert fit.converged

    def test_lambda_max_gives_exact_zeros(self):
        rng = np.random.default_rng(11)
        x, y = random_problem(rng)
        lam_max = lambda_path(x, y, LassoOptions(n_lambda=1))[0]
        for lam in (lam_max, lam_max * 1.5):
            fit = lasso_fit(x, y, lam)
            assert np.all(fit.coefs.values == 0.0)

    def test_orthonormal_closed_form(self):
        rng = np.random.default_rng(12)
        x, y = orthonormal_problem(rng)
        yc = y - y.mean()
        target = x.T @ yc / x.shape[0]
        for lam in (0.05, 0.2, 0.8):
            fit = lasso_fit(x, y, lam)
            expect = np.sign(target) * np.maximum(np.abs(target) - lam, 0.0)
            np.testing.assert_allclose(fit.coefs.values, expect, atol=1e-8)

    def test_kkt_conditions_hold(self):
        rng = np.random.default_rng(13)
        for _ in range(5):
            x, y = random_problem(rng)
            for lam in (0.0, 0.01, 0.1):
                fit = lasso_fit(x, y, lam)
                assert fit.converged
                act, inact = lasso_kkt_residual(x, y, fit, lam)
                assert act <= 1e-6 and inact <= 1e-6

    def test_objective_nonincreasing_over_sweeps(self):
        rng = np.random.default_rng(14)
        x, y = random_problem(rng, n=30, m=8)
        lam = 0.05
        objs = []
        for k in range(1, 9):
            opts = LassoOptions(tol=1e-300, max_iter=k)
            objs.append(lasso_objective(x, y, lasso_fit(x, y, lam, opts), lam, opts))
        for a, b in zip(objs, objs[1:]):
            assert b <= a + 1e-12

    def test_non_convergence_flagged_not_raised(self):
        rng = np.random.default_rng(15)
        x, y = random_problem(rng)
        fit = lasso_fit(x, y, 1e-6, LassoOptions(tol=1e-300, max_iter=2))
        assert not fit.converged
        assert fit.iterations == 2

    def test_constant_column_stays_inert(self):
        rng = np.random.default_rng(16)
        x = rng.standard_normal((30, 3))
        x[:, 1] = 4.0
        y = x[:, 0] + rng.standard_normal(30) * 0.1
        fit = lasso_fit(x, y, 0.01)
        assert fit.coefs.values[1] == 0.0

    def test_internal_standardize_off(self):
        rng = np.random.default_rng(17)
        x, y = random_problem(rng)
        fit = lasso_fit(x, y, 0.0, LassoOptions(internal_standardize=False))
        _, coefs, _ = ols_fit(x, y)
        np.testing.assert_allclose(fit.coefs.values, coefs, atol=1e-6)

    def test_negative_lambda_rejected(self):
        with pytest.raises(ValueError):
            lasso_fit(np.ones((3, 1)), np.ones(3), -0.1)


class TestLambdaPath:
    def test_single_point_is_lambda_max(self):
        rng = np.random.default_rng(20)
        x, y = random_problem(rng)
        path = lambda_path(x, y, LassoOptions(n_lambda=1))
        assert path.shape == (1,)
        fit = lasso_fit(x, y, path[0])
        assert np.all(fit.coefs.values == 0.0)

    def test_first_path_solution_all_zero(self):
        rng = np.random.default_rng(21)
        x, y = random_problem(rng)
        _, fits = fit_lasso_path(x, y)
        assert np.all(fits[0].coefs.values == 0.0)

    def test_geometric_spacing(self):
        rng = np.random.default_rng(22)
        x, y = random_problem(rng, n=50, m=4)
        opts = LassoOptions(n_lambda=37)
        path = lambda_path(x, y, opts)
        assert len(path) == 37
        ratios = path[1:] / path[:-1]
        np.testing.assert_allclose(ratios, ratios[0], rtol=1e-12)
        expected_ratio = opts.resolve_min_ratio(50, 4) ** (1 / 36)
        assert ratios[0] == pytest.approx(expected_ratio, rel=1e-12)

    def test_min_ratio_depends_on_shape(self):
        opts = LassoOptions()
        assert opts.resolve_min_ratio(200, 65) == 1e-4
        assert opts.resolve_min_ratio(50, 65) == 1e-2

    def test_warm_matches_cold(self):
        rng = np.random.default_rng(23)
        x, y = random_problem(rng)
        lams, fits = fit_lasso_path(x, y, LassoOptions(n_lambda=25))
        for lam, fit in zip(lams[::6], fits[::6]):
            cold = lasso_fit(x, y, lam)
            np.testing.assert_allclose(fit.coefs.values, cold.coefs.values, atol=1e-5)


class TestTuneLasso:
    def test_in_sample_tuning_beats_null(self):
        rng = np.random.default_rng(30)
        x, y = random_problem(rng, snr=10.0)
        tuned = tune_lasso((x, y), (x, y))
        assert tuned.valid_mse[tuned.best_index] <= tuned.valid_mse[0]

    def test_pure_noise_never_beats_null_by_luck(self):
        rng = np.random.default_rng(31)
        x = rng.standard_normal((50, 6))
        y = rng.standard_normal(50)
        xv = rng.standard_normal((50, 6))
        yv = rng.standard_normal(50)
        tuned = tune_lasso((x, y), (xv, yv))
        assert tuned.valid_mse[tuned.best_index] <= tuned.valid_mse[0]

    def test_ties_break_to_larger_lambda(self):
        # Validation response orthogonal to every prediction makes all MSE
        # values equal only in contrived cases; instead check the rule on the
        # recorded curve directly.
        rng = np.random.default_rng(32)
        x, y = random_problem(rng)
        tuned = tune_lasso((x, y), random_problem(rng))
        first_min = int(np.flatnonzero(tuned.valid_mse == tuned.valid_mse.min())[0])
        assert tuned.best_index == first_min

    def test_deterministic(self):
        rng = np.random.default_rng(33)
        x, y = random_problem(rng)
        xv, yv = random_problem(rng)
        a = tune_lasso((x, y), (xv, yv))
        b = tune_lasso((x, y), (xv, yv))
        assert a.best_lambda == b.best_lambda
        np.testing.assert_array_equal(a.fit.coefs.values, b.fit.coefs.values)
