"""Robust location primitives: coordinate-wise median, distances to it,
median-of-means and the geometric median (Weiszfeld)."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import Dataset, InvalidArgument, as_rng

COINCIDE_TOL = 1e-12


class ConvergenceWarning(UserWarning):
    pass


def _as_points(points, name="points") -> np.ndarray:
    a = np.asarray(points, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidArgument(f"{name} must be a non-empty k x p matrix")
    return a


def coordinate_median(points) -> np.ndarray:
    """Per-coordinate median; even counts take the midpoint of the two central values."""
    return np.median(_as_points(points), axis=0)


def robust_distances(d) -> np.ndarray:
    """Euclidean distance of every row to the coordinate-wise median of all rows."""
    x = d.x if isinstance(d, Dataset) else _as_points(d)
    return np.linalg.norm(x - np.median(x, axis=0), axis=1)


@dataclass(frozen=True)
class MomConfig:
    """Median-of-means blocking. ``n_blocks=None`` means ``max(1, floor(sqrt(k)))``."""

    n_blocks: int | None = None
    block_assignment: str = "contiguous"

    def __post_init__(self):
        if self.n_blocks is not None and self.n_blocks < 1:
            raise InvalidArgument("n_blocks must be >= 1")
        if self.block_assignment not in ("contiguous", "shuffled"):
            raise InvalidArgument("block_assignment must be 'contiguous' or 'shuffled'")

    def blocks_for(self, k: int) -> int:
        return self.n_blocks if self.n_blocks is not None else max(1, math.isqrt(k))


def make_blocks(k: int, cfg: MomConfig, rng=None) -> list[np.ndarray]:
    """Split ``range(k)`` into near-equal blocks (sizes differ by at most one)."""
    b = cfg.blocks_for(k)
    if k < b:
        raise InvalidArgument(f"need at least n_blocks={b} rows, got {k}")
    order = np.arange(k)
    if cfg.block_assignment == "shuffled":
        order = as_rng(0 if rng is None else rng).generator().permutation(k)
    return np.array_split(order, b)


def median_of_means(values, cfg: MomConfig | None = None, rng=None) -> np.ndarray:
    """Coordinate-wise median of the block means of the rows of ``values``."""
    v = _as_points(values, "values")
    cfg = cfg or MomConfig()
    blocks = make_blocks(v.shape[0], cfg, rng)
    if len(blocks) == 1:
        return v.mean(axis=0)
    means = np.stack([v[b].mean(axis=0) for b in blocks])
    return np.median(means, axis=0)


def sum_of_distances(z, points) -> float:
    return float(np.linalg.norm(_as_points(points) - np.asarray(z, dtype=np.float64), axis=1).sum())


def _data_point_optimal(a, j, tol) -> bool:
    """Exact optimality test for data point ``a[j]``: the pull of the other
    points must not exceed the number of points coinciding with it."""
    diff = a - a[j]
    dist = np.linalg.norm(diff, axis=1)
    same = dist <= tol
    if same.all():
        return True
    pull = (diff[~same] / dist[~same, None]).sum(axis=0)
    return float(np.linalg.norm(pull)) <= same.sum() * (1 + 1e-12)


def weiszfeld(points, tol: float = 1e-10, max_iter: int = 1000, init=None):
    """Weiszfeld iteration with the Vardi-Zhang correction at data points.

    Returns ``(z, n_iter, converged)``. Stops when the step norm falls below
    ``tol * max(1, |z|)``. When the iterate sits on a data point the plain
    update is undefined; if the pull of the other points does not exceed the
    multiplicity of the coincident point, that point is the minimizer. Since
    the iteration only creeps towards a minimizer located on a data point, the
    data point nearest to each iterate is tested for optimality as well.
    """
    a = _as_points(points)
    if not np.all(np.isfinite(a)):
        raise InvalidArgument("geometric median input must be finite")
    if not tol > 0:
        raise InvalidArgument("tol must be > 0")
    k = a.shape[0]
    z = np.median(a, axis=0) if init is None else np.asarray(init, dtype=np.float64).copy()
    if k == 1:
        return a[0].copy(), 0, True
    if k == 2:  # every point of the segment is optimal; take the midpoint
        return 0.5 * (a[0] + a[1]), 0, True
    scale = max(1.0, float(np.abs(a).max()))
    checked = -1
    for it in range(1, max_iter + 1):
        diff = a - z
        dist = np.linalg.norm(diff, axis=1)
        j = int(np.argmin(dist))
        if j != checked:
            checked = j
            if _data_point_optimal(a, j, COINCIDE_TOL * scale):
                return a[j].copy(), it, True
        hit = dist <= COINCIDE_TOL * scale
        far = ~hit
        inv = 1.0 / dist[far]
        t = (inv[:, None] * a[far]).sum(axis=0) / inv.sum()
        eta = int(hit.sum())
        if eta == 0:
            z_new = t
        else:
            # on a non-optimal data point: Vardi-Zhang step away from it
            pull = (inv[:, None] * diff[far]).sum(axis=0)
            r = float(np.linalg.norm(pull))
            z_new = (1.0 - eta / r) * t + (eta / r) * z
        d = z_new - z
        step = float(np.linalg.norm(d))
        z = _extrapolate(a, z, d)
        if step < tol * max(1.0, float(np.linalg.norm(z))):
            return z, it, True
    return z, max_iter, False


def _extrapolate(a, z, d, max_doublings=30):
    """Take the Weiszfeld step ``d`` and keep doubling it while the objective drops.

    Plain Weiszfeld creeps when the minimizer sits close to a data point;
    the doubling search jumps along the (then nearly constant) direction.
    The result is never worse than the plain step, so descent is preserved.
    """
    best = z + d
    f_best = float(np.linalg.norm(a - best, axis=1).sum())
    s = 2.0
    for _ in range(max_doublings):
        cand = z + s * d
        f = float(np.linalg.norm(a - cand, axis=1).sum())
        if not f < f_best:
            break
        best, f_best = cand, f
        s *= 2.0
    return best


def geometric_median(points, tol: float = 1e-10, max_iter: int = 1000) -> np.ndarray:
    """Point minimizing the sum of Euclidean distances to ``points``.

    Emits a ``ConvergenceWarning`` (and still returns the last iterate) when
    ``max_iter`` is reached.
    """
    z, _, ok = weiszfeld(points, tol=tol, max_iter=max_iter)
    if not ok:
        warnings.warn(f"Weiszfeld did not converge in {max_iter} iterations", ConvergenceWarning, stacklevel=2)
    return z
