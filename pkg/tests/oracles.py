"""Independent reference computations used by the tests."""

import itertools

import numpy as np


def sum_dist(z, a):
    return float(np.linalg.norm(a - z, axis=1).sum())


def brute_geometric_median(a, grid=41, rounds=60):
    """Dense grid over the bounding box, then compass search from the best cell.

    The grid is re-centred and shrunk around the incumbent each round, so the
    search never relies on gradients (undefined at data points).
    """
    a = np.asarray(a, dtype=np.float64)
    p = a.shape[1]
    lo, hi = a.min(axis=0), a.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    axes = [np.linspace(lo[j], hi[j], grid if p <= 2 else 15) for j in range(p)]
    pts = np.array(list(itertools.product(*axes)))
    obj = np.linalg.norm(pts[:, None, :] - a[None], axis=2).sum(axis=1)
    best = pts[np.argmin(obj)]
    # data points are candidates too: the minimizer may sit on one
    for row in a:
        if sum_dist(row, a) < sum_dist(best, a):
            best = row.copy()
    step = span / grid
    dirs = np.array([d for d in itertools.product((-1, 0, 1), repeat=p) if any(d)], dtype=np.float64)
    f = sum_dist(best, a)
    for _ in range(rounds * 20):
        moved = False
        for d in dirs:
            cand = best + d * step
            fc = sum_dist(cand, a)
            if fc < f:
                best, f, moved = cand, fc, True
                break
        if not moved:
            step = step / 2
            if np.all(step < 1e-13 * np.maximum(1, np.abs(best))):
                break
    return best, f


def central_difference(fun, theta, h=1e-6):
    theta = np.asarray(theta, dtype=np.float64)
    g = np.empty_like(theta)
    for j in range(theta.size):
        e = np.zeros_like(theta)
        e[j] = h
        g[j] = (fun(theta + e) - fun(theta - e)) / (2 * h)
    return g


def weighted_normal_equations(x, y, c):
    """theta = (X' C X)^{-1} X' C y via explicit solve."""
    return np.linalg.solve(x.T @ (c[:, None] * x), x.T @ (c * y))
