"""Reference estimators: least squares, ridge and lasso on the full sample or
on a subsample. No intercept is fitted anywhere; data are assumed centred."""

from __future__ import annotations

import numpy as np

from .core import Dataset, EstimateResult, InvalidArgument, SubsampleDraw, as_rng, uniform_draw

LASSO_DEFAULT_FRACTION = 0.1


def _rows(d: Dataset, draw: SubsampleDraw | None):
    if d.y is None:
        raise InvalidArgument("baseline regressions need a response y")
    if draw is None:
        return d.x, d.y
    if draw.indices.max() >= d.n:
        raise InvalidArgument("draw indices out of range for dataset")
    return d.x[draw.indices], d.y[draw.indices]


def fit_ols(d: Dataset, draw: SubsampleDraw | None = None) -> EstimateResult:
    """Least squares on the chosen rows; minimum-norm when rank-deficient."""
    x, y = _rows(d, draw)
    theta, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
    warn = []
    if rank < x.shape[1]:
        warn.append(f"rank {rank} < p={x.shape[1]}: minimum-norm solution returned")
    return EstimateResult(theta, "ols", 1, [], None, warn)


def fit_ridge(d: Dataset, lam: float, draw: SubsampleDraw | None = None) -> EstimateResult:
    """Minimize ``|y - X theta|^2 / (2 m) + lam |theta|^2 / 2`` on the chosen rows."""
    if lam < 0:
        raise InvalidArgument("ridge penalty must be >= 0")
    if lam == 0:
        res = fit_ols(d, draw)
        res.method = "ridge"
        return res
    x, y = _rows(d, draw)
    m, p = x.shape
    if m < p:
        g = x @ x.T
        g[np.diag_indices(m)] += m * lam
        theta = x.T @ np.linalg.solve(g, y)
    else:
        h = x.T @ x
        h[np.diag_indices(p)] += m * lam
        theta = np.linalg.solve(h, x.T @ y)
    return EstimateResult(theta, "ridge", 1, [], None, [], {"lam": lam})


def lasso_lambda_max(x, y) -> float:
    """Smallest penalty at which the lasso solution is identically zero."""
    return float(np.max(np.abs(x.T @ y)) / x.shape[0])


def lasso_objective(x, y, theta, lam) -> float:
    r = y - x @ theta
    return float(r @ r / (2 * x.shape[0]) + lam * np.abs(theta).sum())


def soft_threshold(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def fit_lasso(
    d: Dataset,
    lam: float | None = None,
    draw: SubsampleDraw | None = None,
    tol: float = 1e-10,
    max_iter: int = 10000,
    init=None,
) -> EstimateResult:
    """Cyclic coordinate descent on ``|y - X theta|^2 / (2 m) + lam |theta|_1``.

    ``lam=None`` uses ``0.1 * lambda_max``. Converged when the largest
    coordinate change in a sweep is below ``tol``. The objective is recorded
    after every sweep; a sweep that increases it is reported as a warning.
    """
    x, y = _rows(d, draw)
    m, p = x.shape
    if lam is None:
        lam = LASSO_DEFAULT_FRACTION * lasso_lambda_max(x, y)
    if lam < 0:
        raise InvalidArgument("lasso penalty must be >= 0")
    xf = np.asfortranarray(x)
    col_sq = np.einsum("ij,ij->j", x, x) / m
    theta = np.zeros(p) if init is None else np.array(init, dtype=np.float64)
    r = y - x @ theta
    trace = [lasso_objective(x, y, theta, lam)]
    warn = []
    converged = False
    sweep = 0
    for sweep in range(1, max_iter + 1):
        max_delta = 0.0
        for j in range(p):
            if col_sq[j] == 0.0:
                continue
            xj = xf[:, j]
            old = theta[j]
            z = xj @ r / m + col_sq[j] * old
            new = np.sign(z) * max(abs(z) - lam, 0.0) / col_sq[j]
            if new != old:
                r -= (new - old) * xj
                theta[j] = new
                max_delta = max(max_delta, abs(new - old))
        obj = lasso_objective(x, y, theta, lam)
        if obj > trace[-1] + 1e-12 * max(1.0, abs(trace[-1])):
            warn.append(f"objective increased at sweep {sweep}")
        trace.append(obj)
        if max_delta < tol:
            converged = True
            break
    if not converged:
        warn.append(f"coordinate descent reached max_iter={max_iter}")
    return EstimateResult(theta, "lasso", sweep, trace, None, warn, {"lam": lam})


def fit_uniform_subsample(d: Dataset, m: int, rng=0, replace: bool = False) -> EstimateResult:
    """Least squares on ``m`` rows drawn uniformly (without replacement by default)."""
    draw = uniform_draw(d.n, m, as_rng(rng), replace=replace)
    res = fit_ols(d, draw)
    res.method = "uniform-subsample"
    return res
