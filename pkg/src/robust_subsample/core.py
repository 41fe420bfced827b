"""Shared data model, randomness contract and error types."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

WEIGHT_SUM_TOL = 1e-12
_U64 = 2**64


class InvalidArgument(ValueError):
    """A precondition on an argument was violated."""


class EstimationFailure(RuntimeError):
    """An estimator could not produce any estimate."""


def _frozen_array(a, dtype=np.float64, ndim=None, name="array"):
    arr = np.array(a, dtype=dtype, copy=True)
    if ndim is not None and arr.ndim != ndim:
        raise InvalidArgument(f"{name} must be {ndim}-D, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SeededRng:
    """Seed plus stream coordinates for a reproducible random stream.

    The generator is numpy's PCG64 bit generator seeded through
    ``SeedSequence(seed, spawn_key=(stream_id, *path))``. The same
    ``(seed, stream_id, path)`` always yields the same draws, on any
    platform. ``spawn`` derives independent child streams so that the
    sub-steps of an algorithm (rounds, strata, blocks) never share one.
    """

    seed: int
    stream_id: int = 0
    path: tuple = ()

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) < _U64:
                raise InvalidArgument(f"{name} must be an unsigned 64-bit integer, got {v!r}")
        if any(int(k) < 0 for k in self.path):
            raise InvalidArgument("spawn keys must be non-negative")

    def spawn(self, *keys: int) -> "SeededRng":
        return SeededRng(self.seed, self.stream_id, tuple(self.path) + tuple(int(k) for k in keys))

    def replicate(self, stream_id: int) -> "SeededRng":
        return SeededRng(self.seed, stream_id, self.path)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id), *map(int, self.path)))
        return np.random.Generator(np.random.PCG64(ss))

    @property
    def key(self) -> list:
        return [int(self.seed), int(self.stream_id), *map(int, self.path)]


def as_rng(rng) -> SeededRng:
    """Accept a SeededRng or a plain integer seed."""
    if isinstance(rng, SeededRng):
        return rng
    if isinstance(rng, (int, np.integer)):
        return SeededRng(int(rng))
    raise InvalidArgument(f"expected SeededRng or int seed, got {type(rng).__name__}")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Design matrix ``x`` (n x p), optional response ``y`` and true parameter.

    Arrays are copied and made read-only on construction. ``meta`` carries
    the environment descriptor; ``meta["contaminated_raw"] = True`` allows
    non-finite entries to pass validation.
    """

    x: np.ndarray
    y: Optional[np.ndarray] = None
    truth: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen_array(self.x, ndim=2, name="x"))
        if self.y is not None:
            object.__setattr__(self, "y", _frozen_array(self.y, ndim=1, name="y"))
        if self.truth is not None:
            object.__setattr__(self, "truth", _frozen_array(self.truth, ndim=1, name="truth"))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def task(self) -> str:
        return "regression" if self.y is not None else "mean"


def validate_dataset(d: Dataset) -> list[str]:
    """Return a list of invariant violations; empty when the dataset is valid."""
    out = []
    n, p = d.x.shape
    if n < 1:
        out.append("x has no rows (n must be >= 1)")
    if p < 1:
        out.append("x has no columns (p must be >= 1)")
    if d.y is not None and d.y.shape[0] != n:
        out.append("y length mismatch")
    if d.truth is not None and d.truth.shape[0] != p:
        out.append("truth length mismatch")
    if not d.meta.get("contaminated_raw", False):
        for i, j in np.argwhere(~np.isfinite(d.x)):
            out.append(f"non-finite entry at ({i},{j})")
        if d.y is not None:
            for (i,) in np.argwhere(~np.isfinite(d.y)):
                out.append(f"non-finite y at ({i})")
    if d.truth is not None and not np.all(np.isfinite(d.truth)):
        out.append("non-finite truth")
    return out


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Selection probabilities over the n data points (sum to one)."""

    w: np.ndarray

    def __post_init__(self):
        w = _frozen_array(self.w, ndim=1, name="w")
        if w.size < 1:
            raise InvalidArgument("weight vector must be non-empty")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InvalidArgument("weights must be finite and non-negative")
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidArgument(f"weights must sum to 1 (got {w.sum()!r})")
        object.__setattr__(self, "w", w)

    @classmethod
    def uniform(cls, n: int) -> "WeightVector":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def normalized(cls, v, mix_lambda: float = 0.0) -> "WeightVector":
        """Normalize ``v`` and mix with uniform: ``(1-lam) v/sum(v) + lam/n``."""
        v = np.asarray(v, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise InvalidArgument("weights must be a non-empty vector")
        if not 0.0 <= mix_lambda <= 1.0:
            raise InvalidArgument("mix_lambda must lie in [0, 1]")
        total = v.sum()
        if not np.isfinite(total) or total <= 0 or np.any(v < 0):
            raise InvalidArgument("weights must be non-negative with positive finite sum")
        w = (1.0 - mix_lambda) * (v / total) + mix_lambda / v.size
        return cls(w / w.sum())

    @property
    def n(self) -> int:
        return self.w.size

    @property
    def ess(self) -> float:
        return float(1.0 / np.sum(self.w**2))


@dataclass(frozen=True, eq=False)
class SubsampleDraw:
    """Selected row indices and their selection probabilities at draw time."""

    indices: np.ndarray
    probs: np.ndarray
    replace: bool = True

    def __post_init__(self):
        idx = _frozen_array(self.indices, dtype=np.int64, ndim=1, name="indices")
        probs = _frozen_array(self.probs, ndim=1, name="probs")
        if idx.size < 1:
            raise InvalidArgument("a draw needs at least one index")
        if probs.shape != idx.shape:
            raise InvalidArgument("indices and probs must have equal length")
        if np.any(idx < 0):
            raise InvalidArgument("indices must be non-negative")
        if not np.all(probs > 0):
            raise InvalidArgument("selection probabilities must be positive")
        if not self.replace and np.unique(idx).size != idx.size:
            raise InvalidArgument("without-replacement draw has repeated indices")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "probs", probs)

    @property
    def m(self) -> int:
        return self.indices.size


@dataclass
class EstimateResult:
    theta: np.ndarray
    method: str
    iterations: int = 0
    objective_trace: list = field(default_factory=list)
    ess: Optional[float] = None
    warnings: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "theta": [float(v) for v in self.theta],
            "iterations": int(self.iterations),
            "objective_trace": [float(v) for v in self.objective_trace],
            "ess": None if self.ess is None else float(self.ess),
            "warnings": list(self.warnings),
        }


def draw_weighted(weights: WeightVector, m: int, replace: bool = True, rng=0) -> SubsampleDraw:
    """Draw ``m`` indices with probability proportional to ``weights``.

    With replacement (the default) gives independent draws, which is what the
    inverse-probability reweighting in the ERM step assumes.
    """
    if not isinstance(weights, WeightVector):
        weights = WeightVector(weights)
    n = weights.n
    if m < 1:
        raise InvalidArgument("m must be >= 1")
    if not replace and m > n:
        raise InvalidArgument(f"m={m} exceeds n={n} for a without-replacement draw")
    if not replace and np.count_nonzero(weights.w) < m:
        raise InvalidArgument("fewer positive weights than m for a without-replacement draw")
    gen = as_rng(rng).generator()
    idx = gen.choice(n, size=m, replace=replace, p=weights.w)
    return SubsampleDraw(idx, weights.w[idx], replace=replace)


def uniform_draw(n: int, m: int, rng=0, replace: bool = False) -> SubsampleDraw:
    return draw_weighted(WeightVector.uniform(n), m, replace=replace, rng=rng)
