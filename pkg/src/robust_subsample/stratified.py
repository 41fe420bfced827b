"""Stratified subsampling on robust-distance quantiles with median-of-means
stratum estimates and geometric-median aggregation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, EstimateResult, EstimationFailure, InvalidArgument, as_rng
from .robust import (
    MomConfig,
    coordinate_median,
    make_blocks,
    median_of_means,
    robust_distances,
    weiszfeld,
)

BLOCK_RIDGE = 1e-6


@dataclass(frozen=True)
class StratConfig:
    m: int
    K: int = 10
    task: str = "auto"
    mom: MomConfig = field(default_factory=MomConfig)
    gm_tol: float = 1e-10
    gm_max_iter: int = 1000
    block_ridge: float = BLOCK_RIDGE

    def __post_init__(self):
        if self.K < 1:
            raise InvalidArgument("K must be >= 1")
        if self.m < self.K:
            raise InvalidArgument(f"m={self.m} must be >= K={self.K}")
        if self.task not in ("auto", "mean", "regression"):
            raise InvalidArgument("task must be 'auto', 'mean' or 'regression'")
        if not self.gm_tol > 0:
            raise InvalidArgument("gm_tol must be > 0")


def stratify(d, K: int) -> list[np.ndarray]:
    """Split indices into ``K`` contiguous runs of the sorted robust distances.

    ``d`` is a Dataset or a precomputed distance vector. Sorting is stable, so
    ties keep original index order; run sizes differ by at most one.
    """
    dist = robust_distances(d) if isinstance(d, Dataset) else np.asarray(d, dtype=np.float64)
    n = dist.size
    if not 1 <= K <= n:
        raise InvalidArgument(f"K={K} must lie in [1, n={n}]")
    order = np.argsort(dist, kind="stable")
    return np.array_split(order, K)


def allocate(strata_sizes, m: int) -> np.ndarray:
    """Proportional allocation ``m |S_k| / n`` rounded by largest remainder.

    Quotas are handled in exact integer arithmetic; remainder ties go to the
    lowest stratum index. Allocations never exceed the stratum size; any
    excess is handed on by the same largest-remainder order.
    """
    sizes = np.asarray(strata_sizes, dtype=np.int64)
    if sizes.ndim != 1 or sizes.size == 0 or np.any(sizes < 0):
        raise InvalidArgument("strata sizes must be a non-empty vector of counts")
    n = int(sizes.sum())
    if not 0 <= m <= n:
        raise InvalidArgument(f"m={m} must lie in [0, n={n}]")
    num = m * sizes
    alloc = num // n
    rem = num % n
    # stable sort on -rem: larger remainders first, ties by stratum index
    order = np.argsort(-rem, kind="stable")
    left = m - int(alloc.sum())
    for k in order:
        if left == 0:
            break
        if alloc[k] < sizes[k]:
            alloc[k] += 1
            left -= 1
    while left > 0:  # reachable only when a cap blocked a unit above
        for k in order:
            if left and alloc[k] < sizes[k]:
                alloc[k] += 1
                left -= 1
    return alloc


def _ridge_fit(x, y, ridge):
    """argmin |y - x theta|^2 / 2 + ridge |theta|^2 / 2."""
    m, p = x.shape
    if m < p:
        g = x @ x.T
        g[np.diag_indices(m)] += ridge
        return x.T @ np.linalg.solve(g, y)
    h = x.T @ x
    h[np.diag_indices(p)] += ridge
    return np.linalg.solve(h, x.T @ y)


def _stratum_estimate(d, idx, task, cfg, rng):
    if task == "mean":
        return median_of_means(d.x[idx], cfg.mom, rng)
    blocks = make_blocks(idx.size, cfg.mom, rng)
    fits = np.stack([_ridge_fit(d.x[idx[b]], d.y[idx[b]], cfg.block_ridge) for b in blocks])
    return fits[0] if len(fits) == 1 else coordinate_median(fits)


def run_stratified(d: Dataset, cfg: StratConfig, rng=0) -> EstimateResult:
    """Stratified robust estimate of the location (mean task) or coefficients.

    Regression strata are estimated by a median-of-means over block-wise
    ridge-stabilized least-squares fits. Strata that receive no points, or
    fewer points than blocks, are skipped with a warning.
    """
    rng = as_rng(rng)
    task = d.task if cfg.task == "auto" else cfg.task
    if task == "regression" and d.y is None:
        raise InvalidArgument("regression task requires a response y")
    if cfg.m > d.n:
        raise InvalidArgument(f"m={cfg.m} exceeds n={d.n}")
    strata = stratify(d, cfg.K)
    alloc = allocate([s.size for s in strata], cfg.m)
    ests, used, warn = [], [], []
    for k, (members, mk) in enumerate(zip(strata, alloc)):
        if mk == 0:
            warn.append(f"stratum {k} skipped: no points allocated")
            continue
        n_blocks = cfg.mom.blocks_for(int(mk))
        if mk < n_blocks:
            warn.append(f"stratum {k} skipped: {mk} points for {n_blocks} blocks")
            continue
        gen = rng.spawn(k, 0).generator()
        idx = gen.choice(members, size=int(mk), replace=False)
        ests.append(_stratum_estimate(d, idx, task, cfg, rng.spawn(k, 1)))
        used.append(k)
    if not ests:
        raise EstimationFailure("all strata were skipped")
    pts = np.stack(ests)
    theta, n_iter, ok = weiszfeld(pts, tol=cfg.gm_tol, max_iter=cfg.gm_max_iter)
    if not ok:
        warn.append(f"geometric median did not converge in {cfg.gm_max_iter} iterations")
    return EstimateResult(
        theta,
        "stratified",
        n_iter,
        [],
        None,
        warn,
        {
            "strata_sizes": [int(s.size) for s in strata],
            "allocation": [int(a) for a in alloc],
            "used_strata": used,
            "stratum_estimates": pts,
        },
    )
