"""Per-observation losses and the importance-weighted ERM solver.

Two tasks share one interface. With a response (regression) the residual is
``y - x.theta``; without one (mean estimation) it is the vector ``x - theta``
and the loss is applied to its Euclidean norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, EstimateResult, InvalidArgument, SubsampleDraw, WeightVector

STABILIZER_SCALE = 1e-8


@dataclass(frozen=True)
class LossKind:
    tag: str = "squared"
    delta: float = 1.0

    def __post_init__(self):
        if self.tag not in ("squared", "huber"):
            raise InvalidArgument(f"unknown loss {self.tag!r}")
        if self.tag == "huber" and not self.delta > 0:
            raise InvalidArgument("huber delta must be > 0")

    @classmethod
    def parse(cls, text: str) -> "LossKind":
        tag, _, arg = text.partition(":")
        if tag == "huber":
            return cls("huber", float(arg) if arg else 1.0)
        if tag == "squared" and not arg:
            return cls()
        raise InvalidArgument(f"bad loss spec {text!r}")

    def __str__(self):
        return "squared" if self.tag == "squared" else f"huber:{self.delta!r}"

    def rho(self, a):
        """Loss as a function of the residual magnitude ``a >= 0``."""
        a = np.abs(a)
        if self.tag == "squared":
            return 0.5 * a * a
        return np.where(a <= self.delta, 0.5 * a * a, self.delta * (a - 0.5 * self.delta))

    def irls_weight(self, a):
        """psi(a) / a: 1 for squared, min(1, delta/a) for Huber."""
        a = np.abs(np.asarray(a, dtype=np.float64))
        if self.tag == "squared":
            return np.ones_like(a)
        out = np.ones_like(a)
        big = a > self.delta
        out[big] = self.delta / a[big]
        return out


SQUARED = LossKind()


def huber(delta: float = 1.0) -> LossKind:
    return LossKind("huber", delta)


def loss_value(kind: LossKind, theta, x, y=None) -> float:
    theta = np.asarray(theta, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != theta.shape:
        raise InvalidArgument("x and theta must have the same length")
    a = abs(y - x @ theta) if y is not None else np.linalg.norm(x - theta)
    return float(kind.rho(a))


def loss_gradient(kind: LossKind, theta, x, y=None) -> np.ndarray:
    """Analytic gradient with respect to ``theta``."""
    theta = np.asarray(theta, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != theta.shape:
        raise InvalidArgument("x and theta must have the same length")
    if y is not None:
        r = y - x @ theta
        return -kind.irls_weight(r) * r * x
    r = x - theta
    return -kind.irls_weight(np.linalg.norm(r)) * r


def losses(kind: LossKind, theta, x, y=None) -> np.ndarray:
    """Loss of every row of ``x`` at ``theta``."""
    x = np.asarray(x, dtype=np.float64)
    if y is not None:
        a = np.abs(np.asarray(y) - x @ theta)
    else:
        a = np.linalg.norm(x - theta, axis=1)
    return kind.rho(a)


def _objective(kind, theta, x, y, c, ridge, anchor):
    return float(c @ losses(kind, theta, x, y) + 0.5 * ridge * np.sum((theta - anchor) ** 2))


def _weighted_lsq(x, y, c, ridge, anchor):
    """argmin sum c_i/2 (y_i - x_i.theta)^2 + ridge/2 |theta - anchor|^2.

    Returns ``(theta, rank_deficient)``. With ``ridge == 0`` the solution is the
    minimum-distance-to-anchor least-squares solution.
    """
    m, p = x.shape
    r0 = y - x @ anchor
    if ridge == 0:
        sw = np.sqrt(c)
        sol, _, rank, _ = np.linalg.lstsq(sw[:, None] * x, sw * r0, rcond=None)
        return anchor + sol, rank < p
    if m < p:
        g = x @ x.T
        g[np.diag_indices(m)] += ridge / c
        return anchor + x.T @ np.linalg.solve(g, r0), False
    h = x.T @ (c[:, None] * x)
    h[np.diag_indices(p)] += ridge
    return anchor + np.linalg.solve(h, x.T @ (c * r0)), False


def _weighted_mean(x, c, ridge, anchor):
    return (c @ x + ridge * anchor) / (c.sum() + ridge)


def default_ridge(x_sub, c) -> float:
    """Trace-scaled stabilizer used when a regression subsample has fewer rows than columns."""
    m, p = x_sub.shape
    if m >= p:
        return 0.0
    return STABILIZER_SCALE * float(c @ np.einsum("ij,ij->i", x_sub, x_sub)) / p


def weighted_erm(
    kind: LossKind,
    d: Dataset,
    draw: SubsampleDraw,
    base_weights: WeightVector | None = None,
    ridge: float | None = None,
    init=None,
    tol: float = 1e-10,
    max_iter: int = 200,
    anchor=None,
) -> EstimateResult:
    """Minimize the importance-weighted empirical risk over a subsample.

    Objective: ``sum_j L(theta; X_{i_j}) / (m w_{i_j}) + ridge/2 |theta - anchor|^2``,
    where ``w`` is ``base_weights`` at the drawn indices (or ``draw.probs``).
    ``anchor`` defaults to zero. ``ridge=None`` picks the trace-scaled
    stabilizer for under-determined regression subsamples and 0 otherwise.
    Squared loss is solved directly; Huber uses IRLS started at ``init``.
    """
    idx = draw.indices
    if idx.max() >= d.n:
        raise InvalidArgument("draw indices out of range for dataset")
    w = base_weights.w[idx] if base_weights is not None else draw.probs
    if np.any(w <= 0):
        raise InvalidArgument("selected points must have positive weight")
    m = idx.size
    c = 1.0 / (m * w)
    x = d.x[idx]
    y = None if d.y is None else d.y[idx]
    p = d.p
    if ridge is None:
        ridge = default_ridge(x, c) if y is not None else 0.0
    if ridge < 0:
        raise InvalidArgument("ridge must be >= 0")
    anchor = np.zeros(p) if anchor is None else np.asarray(anchor, dtype=np.float64)
    theta = anchor.copy() if init is None else np.asarray(init, dtype=np.float64).copy()

    warn = []
    trace = [_objective(kind, theta, x, y, c, ridge, anchor)]
    it = 0
    if kind.tag == "squared":
        if y is None:
            theta = _weighted_mean(x, c, ridge, anchor)
        else:
            theta, deficient = _weighted_lsq(x, y, c, ridge, anchor)
            if deficient:
                warn.append("rank-deficient subsample: minimum-norm solution returned")
        it = 1
        trace.append(_objective(kind, theta, x, y, c, ridge, anchor))
    else:
        converged = False
        for it in range(1, max_iter + 1):
            if y is None:
                a = np.linalg.norm(x - theta, axis=1)
                new = _weighted_mean(x, c * kind.irls_weight(a), ridge, anchor)
            else:
                a = y - x @ theta
                new, deficient = _weighted_lsq(x, y, c * kind.irls_weight(a), ridge, anchor)
                if deficient and "rank-deficient" not in " ".join(warn):
                    warn.append("rank-deficient subsample: minimum-norm solution returned")
            step = float(np.linalg.norm(new - theta))
            theta = new
            trace.append(_objective(kind, theta, x, y, c, ridge, anchor))
            if step <= tol * max(1.0, float(np.linalg.norm(theta))):
                converged = True
                break
        if not converged:
            warn.append(f"IRLS reached max_iter={max_iter}")
    return EstimateResult(theta, "weighted-erm", it, trace, None, warn, {"ridge": ridge})
