"""Adaptive importance sampling: weighted draw, weighted ERM, exponential
reweighting, repeated for a fixed number of rounds."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    Dataset,
    EstimateResult,
    EstimationFailure,
    InvalidArgument,
    WeightVector,
    as_rng,
    draw_weighted,
)
from .loss import LossKind, losses, weighted_erm


@dataclass(frozen=True)
class AisConfig:
    """Settings for :func:`run_ais`.

    ``beta="auto"`` sets the temperature to ``1 / median(loss)`` after the
    first round. ``anchor_warm_start`` centres the ERM stabilizer on the
    previous round's estimate instead of the origin; it only changes the
    answer when the ERM problem is not uniquely determined (fewer rows than
    columns), where it keeps what earlier rounds learned in the directions
    the current subsample cannot see.
    """

    m: int
    T: int = 10
    beta: float | str = "auto"
    loss: LossKind = field(default_factory=LossKind)
    mix_lambda: float = 0.05
    replace: bool = True
    ridge: float | None = None
    anchor_warm_start: bool = True

    def __post_init__(self):
        if isinstance(self.loss, str):
            object.__setattr__(self, "loss", LossKind.parse(self.loss))
        if self.m < 1:
            raise InvalidArgument("m must be >= 1")
        if self.T < 1:
            raise InvalidArgument("T must be >= 1")
        if self.beta != "auto" and not (isinstance(self.beta, (int, float)) and self.beta >= 0):
            raise InvalidArgument("beta must be 'auto' or a number >= 0")
        if not 0 <= self.mix_lambda <= 0.5:
            raise InvalidArgument("mix_lambda must lie in [0, 0.5]")
        if self.ridge is not None and self.ridge < 0:
            raise InvalidArgument("ridge must be >= 0")


def update_weights(losses_, beta: float, mix_lambda: float = 0.05) -> WeightVector:
    """``w_i ∝ exp(-beta L_i)``, normalized, then mixed with uniform.

    The minimum loss is subtracted before exponentiating; the shift cancels
    in the normalization, so the result is exact and cannot overflow.
    """
    L = np.asarray(losses_, dtype=np.float64)
    if L.ndim != 1 or L.size == 0:
        raise InvalidArgument("losses must be a non-empty vector")
    if np.any(np.isnan(L)):
        raise InvalidArgument("losses contain NaN")
    finite = np.isfinite(L)
    if not finite.any():
        raise InvalidArgument("all losses are infinite")
    if beta < 0:
        raise InvalidArgument("beta must be >= 0")
    u = np.zeros_like(L)
    u[finite] = np.exp(-beta * (L[finite] - L[finite].min()))
    return WeightVector.normalized(u, mix_lambda)


def auto_beta(L) -> float:
    med = float(np.median(L))
    if med > 0 and np.isfinite(med):
        return 1.0 / med
    mean = float(np.mean(L))
    return 1.0 / mean if mean > 0 and np.isfinite(mean) else 1.0


def run_ais(d: Dataset, cfg: AisConfig, rng=0) -> EstimateResult:
    """Run ``cfg.T`` rounds of adaptive importance sampling on ``d``.

    Starts from ``theta = 0`` and uniform weights. Each round draws ``m``
    indices by the current weights (stream ``rng.spawn(t)``), solves the
    importance-weighted ERM warm-started at the previous estimate,
    evaluates the loss on all ``n`` points and reweights.

    ``objective_trace`` holds the full-data mean loss after each round; the
    per-round weighted objectives are in ``info["erm_objective"]``.
    """
    rng = as_rng(rng)
    if not cfg.replace and cfg.m > d.n:
        raise InvalidArgument(f"m={cfg.m} exceeds n={d.n} for a without-replacement draw")
    theta = np.zeros(d.p)
    w = WeightVector.uniform(d.n)
    beta = None if cfg.beta == "auto" else float(cfg.beta)
    trace, erm_obj, warn = [], [], []
    for t in range(1, cfg.T + 1):
        draw = draw_weighted(w, cfg.m, replace=cfg.replace, rng=rng.spawn(t))
        res = weighted_erm(
            cfg.loss,
            d,
            draw,
            w,
            ridge=cfg.ridge,
            init=theta,
            anchor=theta if cfg.anchor_warm_start else None,
        )
        theta = res.theta
        erm_obj.append(res.objective_trace[-1])
        warn.extend(f"round {t}: {msg}" for msg in res.warnings)
        L = losses(cfg.loss, theta, d.x, d.y)
        if beta is None:
            beta = auto_beta(L)
        w = update_weights(L, beta, cfg.mix_lambda)
        trace.append(float(np.mean(L)))
    if not np.all(np.isfinite(theta)):
        raise EstimationFailure("AIS produced a non-finite estimate")
    return EstimateResult(
        theta,
        "ais",
        cfg.T,
        trace,
        w.ess,
        warn,
        {"beta": beta, "erm_objective": erm_obj, "weights": w},
    )
