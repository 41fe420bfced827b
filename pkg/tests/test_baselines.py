import numpy as np
import pytest

from robust_subsample import (
    Dataset,
    InvalidArgument,
    SeededRng,
    SubsampleDraw,
    fit_lasso,
    fit_ols,
    fit_ridge,
    fit_uniform_subsample,
)
from robust_subsample.baselines import lasso_lambda_max, lasso_objective, soft_threshold


def test_ols_noiseless_recovery():
    gen = np.random.default_rng(0)
    x = gen.standard_normal((40, 6))
    beta = gen.standard_normal(6)
    assert np.max(np.abs(fit_ols(Dataset(x, x @ beta)).theta - beta)) < 1e-8


def test_ols_single_row():
    assert np.allclose(fit_ols(Dataset([[2.0]], [6.0])).theta, [3.0])


def test_ols_matches_normal_equations():
    gen = np.random.default_rng(1)
    x, y = gen.standard_normal((50, 5)), gen.standard_normal(50)
    ref = np.linalg.solve(x.T @ x, x.T @ y)
    assert np.max(np.abs(fit_ols(Dataset(x, y)).theta - ref)) < 1e-8


def test_ols_rank_deficient_warns():
    res = fit_ols(Dataset(np.ones((3, 2)), [1.0, 1.0, 1.0]))
    assert res.warnings and np.allclose(res.theta, [0.5, 0.5])


def test_ols_on_draw_uses_selected_rows():
    gen = np.random.default_rng(2)
    x, y = gen.standard_normal((20, 2)), gen.standard_normal(20)
    draw = SubsampleDraw([1, 4, 7, 9], [0.05] * 4, replace=False)
    ref = np.linalg.lstsq(x[[1, 4, 7, 9]], y[[1, 4, 7, 9]], rcond=None)[0]
    assert np.allclose(fit_ols(Dataset(x, y), draw).theta, ref)


def test_ridge_zero_is_ols(small_regression):
    a = fit_ridge(small_regression, 0.0).theta
    assert np.max(np.abs(a - fit_ols(small_regression).theta)) < 1e-10


def test_ridge_huge_penalty_shrinks_to_zero(small_regression):
    assert np.linalg.norm(fit_ridge(small_regression, 1e12).theta) < 1e-6


def test_ridge_scalar_closed_form():
    # |y - x t|^2/(2m) + lam t^2/2 -> t = (sum xy / m) / (sum x^2 / m + lam) = 3 / 2
    res = fit_ridge(Dataset([[1.0], [1.0]], [2.0, 4.0]), 1.0)
    assert np.isclose(res.theta[0], 1.5, rtol=0, atol=1e-14)


def test_ridge_dual_and_primal_agree():
    gen = np.random.default_rng(3)
    x, y = gen.standard_normal((8, 12)), gen.standard_normal(8)
    wide = fit_ridge(Dataset(x, y), 0.3).theta
    ref = np.linalg.solve(x.T @ x / 8 + 0.3 * np.eye(12), x.T @ y / 8)
    assert np.allclose(wide, ref, atol=1e-12)
    with pytest.raises(InvalidArgument):
        fit_ridge(Dataset(x, y), -1.0)


def test_lasso_zero_penalty_is_ols(small_regression):
    res = fit_lasso(small_regression, 0.0, tol=1e-12)
    assert np.max(np.abs(res.theta - fit_ols(small_regression).theta)) < 1e-6


def test_lasso_orthonormal_design_soft_threshold():
    gen = np.random.default_rng(4)
    m, p = 30, 5
    q, _ = np.linalg.qr(gen.standard_normal((m, p)))
    x = q * np.sqrt(m)  # columns with x_j'x_j / m = 1, mutually orthogonal
    y = gen.standard_normal(m) * 2
    lam = 0.3
    res = fit_lasso(Dataset(x, y), lam)
    assert np.allclose(res.theta, soft_threshold(x.T @ y / m, lam), atol=1e-10)


def test_lasso_full_shrinkage_threshold(small_regression):
    d = small_regression
    lam = lasso_lambda_max(d.x, d.y)
    assert np.all(fit_lasso(d, lam).theta == 0)
    assert np.any(fit_lasso(d, 0.99 * lam).theta != 0)


def test_lasso_kkt_and_monotone_objective():
    gen = np.random.default_rng(5)
    m, p = 80, 30
    x = gen.standard_normal((m, p))
    beta = np.zeros(p)
    beta[:4] = [2, -1, 1.5, 0.5]
    y = x @ beta + 0.3 * gen.standard_normal(m)
    d = Dataset(x, y)
    res = fit_lasso(d, tol=1e-12)
    lam = res.info["lam"]
    assert np.isclose(lam, 0.1 * lasso_lambda_max(x, y))
    g = x.T @ (y - x @ res.theta) / m
    act = res.theta != 0
    assert np.all(np.abs(g[~act]) <= lam + 1e-6)
    assert np.allclose(g[act], lam * np.sign(res.theta[act]), atol=1e-6)
    tr = res.objective_trace
    assert all(b <= a + 1e-12 for a, b in zip(tr, tr[1:]))
    assert np.isclose(tr[-1], lasso_objective(x, y, res.theta, lam))
    assert not res.warnings


def test_lasso_max_iter_warning(small_regression):
    res = fit_lasso(small_regression, 0.01, max_iter=1, tol=1e-15)
    assert any("max_iter" in w for w in res.warnings)


def test_uniform_subsample_deterministic(small_regression):
    a = fit_uniform_subsample(small_regression, 20, SeededRng(1))
    b = fit_uniform_subsample(small_regression, 20, SeededRng(1))
    assert np.array_equal(a.theta, b.theta) and a.method == "uniform-subsample"


def test_baselines_need_response():
    with pytest.raises(InvalidArgument):
        fit_ols(Dataset(np.ones((3, 2))))
