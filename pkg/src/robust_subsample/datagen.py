"""Synthetic environments: Gaussian designs with heavy-tailed, contaminated or
AR(1)-dependent observations."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .core import Dataset, InvalidArgument, as_rng

NOISE_KINDS = ("gaussian", "student_t", "pareto")


@dataclass(frozen=True)
class Noise:
    """Noise law. ``shape`` is the degrees of freedom (student_t) or tail index (pareto).

    Pareto noise is symmetrized: a Lomax (Pareto II) magnitude with a random
    sign, times ``scale``. It has infinite variance for ``shape <= 2``.
    """

    kind: str = "gaussian"
    scale: float = 1.0
    shape: float | None = None

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise InvalidArgument(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")
        if not self.scale >= 0:
            raise InvalidArgument("noise scale must be >= 0")
        if self.kind != "gaussian":
            if self.shape is None or not self.shape > 0:
                raise InvalidArgument(f"{self.kind} noise needs a positive shape parameter")

    @classmethod
    def parse(cls, text: str) -> "Noise":
        """Parse ``kind:param[,param]``.

        ``gaussian:SIGMA``, ``student_t:NU,SIGMA``, ``pareto:ALPHA,SIGMA``.
        The scale may be omitted (defaults to 1.0).
        """
        kind, _, rest = text.strip().partition(":")
        kind = kind.strip().lower().replace("-", "_")
        try:
            params = [float(v) for v in rest.split(",") if v.strip()]
        except ValueError:
            raise InvalidArgument(f"bad noise parameters in {text!r}") from None
        if kind == "gaussian":
            if len(params) > 1:
                raise InvalidArgument("gaussian takes one parameter (sigma)")
            return cls(kind, params[0] if params else 1.0)
        if kind in ("student_t", "pareto"):
            if not 1 <= len(params) <= 2:
                raise InvalidArgument(f"{kind} takes shape[,scale]")
            return cls(kind, params[1] if len(params) == 2 else 1.0, params[0])
        raise InvalidArgument(f"unknown noise kind {kind!r}")

    def __str__(self):
        if self.kind == "gaussian":
            return f"gaussian:{self.scale!r}"
        return f"{self.kind}:{self.shape!r},{self.scale!r}"

    def sample(self, gen: np.random.Generator, size) -> np.ndarray:
        if self.kind == "gaussian":
            z = gen.standard_normal(size)
        elif self.kind == "student_t":
            z = gen.standard_t(self.shape, size)
        else:
            mag = gen.pareto(self.shape, size)
            z = np.where(gen.random(size) < 0.5, -mag, mag)
        return self.scale * z


@dataclass(frozen=True)
class EnvironmentSpec:
    """Generating environment.

    ``task="regression"`` gives ``y = X beta + noise``; ``task="mean"`` gives rows
    ``X_i = mu + noise_i`` with no response (location estimation). ``phi`` is the
    AR(1) coefficient across rows; 0 means i.i.d.
    """

    n: int
    p: int
    s: int
    beta_scale: float = 1.0
    noise: Noise = field(default_factory=Noise)
    eps: float = 0.0
    c_mag: float = 1e3
    phi: float = 0.0
    task: str = "regression"

    def __post_init__(self):
        if isinstance(self.noise, str):
            object.__setattr__(self, "noise", Noise.parse(self.noise))
        elif isinstance(self.noise, dict):
            object.__setattr__(self, "noise", Noise(**self.noise))
        self.validate()

    def validate(self):
        if self.n < 1 or self.p < 1:
            raise InvalidArgument("n and p must be >= 1")
        if not 0 <= self.s <= self.p:
            raise InvalidArgument("s must satisfy 0 <= s <= p")
        if not 0 <= self.eps < 0.5:
            raise InvalidArgument("eps must lie in [0, 0.5)")
        if not -1 < self.phi < 1:
            raise InvalidArgument("phi must lie in (-1, 1)")
        if self.c_mag < 0:
            raise InvalidArgument("c_mag must be >= 0")
        if self.task not in ("regression", "mean"):
            raise InvalidArgument("task must be 'regression' or 'mean'")

    @property
    def dependence(self) -> str:
        return "iid" if self.phi == 0 else f"ar1({self.phi!r})"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["noise"] = str(self.noise)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EnvironmentSpec":
        return cls(**d)


def _ar1_rows(z: np.ndarray, phi: float) -> np.ndarray:
    """Stationary AR(1) across rows: row_i = phi row_{i-1} + sqrt(1-phi^2) z_i."""
    if phi == 0:
        return z
    out = np.empty_like(z)
    out[0] = z[0]
    c = math.sqrt(1.0 - phi * phi)
    for i in range(1, z.shape[0]):
        out[i] = phi * out[i - 1] + c * z[i]
    return out


def sparse_truth(p: int, s: int, beta_scale: float = 1.0) -> np.ndarray:
    beta = np.zeros(p)
    beta[:s] = beta_scale
    return beta


def gen_linear(spec: EnvironmentSpec, rng=0) -> Dataset:
    """Draw a sparse linear-regression dataset ``y = X beta + noise``."""
    rng = as_rng(rng)
    gen = rng.spawn(0).generator()
    x = _ar1_rows(gen.standard_normal((spec.n, spec.p)), spec.phi)
    beta = sparse_truth(spec.p, spec.s, spec.beta_scale)
    y = x @ beta + spec.noise.sample(gen, spec.n)
    d = Dataset(x, y, beta, _meta(spec))
    return corrupt_rows(d, spec.eps, spec.c_mag, rng.spawn(1))


def gen_location(spec: EnvironmentSpec, rng=0) -> Dataset:
    """Draw rows ``mu + noise`` for mean estimation; ``truth`` is ``mu``.

    Dependence (``phi``) is applied to the noise rows, so the rows themselves
    form a stationary AR(1) sequence around ``mu``.
    """
    rng = as_rng(rng)
    gen = rng.spawn(0).generator()
    mu = sparse_truth(spec.p, spec.s, spec.beta_scale)
    noise = spec.noise.sample(gen, (spec.n, spec.p))
    x = mu + _ar1_rows(noise, spec.phi)
    d = Dataset(x, None, mu, _meta(spec))
    return corrupt_rows(d, spec.eps, spec.c_mag, rng.spawn(1))


def generate(spec: EnvironmentSpec, rng=0) -> Dataset:
    return gen_linear(spec, rng) if spec.task == "regression" else gen_location(spec, rng)


def _meta(spec: EnvironmentSpec) -> dict:
    return {
        "noise": str(spec.noise),
        "eps": spec.eps,
        "dependence": spec.dependence,
        "spec": spec.to_dict(),
        "corrupted": [],
    }


def n_corrupted(n: int, eps: float) -> int:
    # the small guard keeps e.g. 0.29 * 100 from flooring to 28
    return int(math.floor(eps * n + 1e-9))


def corrupt_rows(d: Dataset, eps: float, c_mag: float, rng=0) -> Dataset:
    """Replace ``floor(eps * n)`` uniformly chosen rows with uniform junk.

    Both the x-row and (if present) the response are overwritten by
    independent draws from ``U[-c_mag, c_mag]``. The corrupted indices are
    recorded (sorted) in ``meta["corrupted"]``.
    """
    if not 0 <= eps < 0.5:
        raise InvalidArgument(f"eps={eps} outside [0, 0.5): breakdown point exceeded")
    k = n_corrupted(d.n, eps)
    if k == 0:
        return d
    gen = as_rng(rng).generator()
    idx = np.sort(gen.choice(d.n, size=k, replace=False))
    x = np.array(d.x)
    x[idx] = gen.uniform(-c_mag, c_mag, size=(k, d.p))
    y = None
    if d.y is not None:
        y = np.array(d.y)
        y[idx] = gen.uniform(-c_mag, c_mag, size=k)
    meta = dict(d.meta)
    meta.update(corrupted=[int(i) for i in idx], eps=eps, c_mag=c_mag)
    return replace(d, x=x, y=y, meta=meta)
