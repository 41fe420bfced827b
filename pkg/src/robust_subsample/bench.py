"""Experiment harness: method x subsample-size sweeps over replicated synthetic
datasets, MSE aggregation and log-log rate fits.

Every cell ``(replicate r, method i, size j)`` runs on the random stream
``SeededRng(seed, r).spawn(1, i, j)``; the dataset for replicate ``r`` comes
from ``SeededRng(seed, r).spawn(0)``. Reports are a pure function of the
spec, apart from the ``timestamp`` and ``timing`` blocks.
"""

from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .ais import AisConfig, run_ais
from .baselines import fit_lasso, fit_ols, fit_ridge, fit_uniform_subsample
from .core import Dataset, EstimateResult, InvalidArgument, SeededRng, uniform_draw
from .datagen import EnvironmentSpec, Noise, generate
from .robust import MomConfig
from .stratified import StratConfig, run_stratified

SCHEMA = 1
THREADS_ENV = "ROBUST_SUBSAMPLE_THREADS"
RNG_ALGORITHM = "numpy PCG64 via SeedSequence(seed, spawn_key=(stream_id, *path))"

# Noise scales for the sparse reference environments (n=10000, p=1000, s=5).
# Both are set so that minimum-norm subsample OLS at m=800 has MSE about
# 0.0014 (Gaussian) and 0.0044 (heavy-tailed), using
# MSE ~ ((1 - m/p) |beta|^2 + V m/(p-m)) / p with V the noise variance.
SPARSE_GAUSSIAN = Noise("gaussian", 0.3)
SPARSE_HEAVY = Noise("student_t", 0.5, 3.0)


def sparse_env(noise: Noise, **overrides) -> EnvironmentSpec:
    kw = dict(n=10000, p=1000, s=5, beta_scale=1.0, noise=noise)
    kw.update(overrides)
    return EnvironmentSpec(**kw)


def mse(theta_hat, truth) -> float:
    a = np.asarray(theta_hat, dtype=np.float64)
    b = np.asarray(truth, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise InvalidArgument(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def fit_rate(errors) -> tuple[float, float, float]:
    """OLS fit of log(error) on log(m): returns ``(slope, intercept, r2)``."""
    pts = np.asarray(errors, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise InvalidArgument("need at least 3 (m, error) pairs")
    if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
        raise InvalidArgument("subsample sizes and errors must be positive and finite")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    # a response flat up to rounding is fitted exactly by a constant
    flat = np.ptp(ly) <= 1e-12 * max(1.0, float(np.abs(ly).max()))
    r2 = 1.0 if flat else 1.0 - float(resid @ resid) / ss_tot
    return float(slope), float(intercept), float(r2)


# -- methods ---------------------------------------------------------------

FULL_SAMPLE = {"ols", "ridge", "lasso"}
METHOD_NAMES = ("ais", "stratified", "uniform-subsample", "uniform-mean", "ols", "ridge", "lasso")


def _method_label(cfg: dict) -> str:
    return cfg.get("label", cfg["name"])


def _is_full(cfg: dict) -> bool:
    return cfg["name"] in FULL_SAMPLE and not cfg.get("subsample", False)


def run_method(cfg: dict, d: Dataset, m: int | None, rng: SeededRng):
    """Fit one method configuration; ``m=None`` means the full sample."""
    name = cfg["name"]
    if name == "ais":
        ais_cfg = AisConfig(
            m=m,
            T=cfg.get("T", 10),
            beta=cfg.get("beta", "auto"),
            loss=cfg.get("loss", "squared"),
            mix_lambda=cfg.get("lambda", 0.05),
            replace=cfg.get("mode", "with") == "with",
            ridge=cfg.get("ridge"),
            anchor_warm_start=cfg.get("anchor", True),
        )
        return run_ais(d, ais_cfg, rng)
    if name == "stratified":
        mom = MomConfig(cfg.get("mom_blocks"), cfg.get("block_assignment", "contiguous"))
        return run_stratified(d, StratConfig(m=m, K=cfg.get("K", 10), task=cfg.get("task", "auto"), mom=mom), rng)
    if name == "uniform-subsample":
        return fit_uniform_subsample(d, m, rng)
    if name == "uniform-mean":
        draw = uniform_draw(d.n, m, rng)
        return EstimateResult(d.x[draw.indices].mean(axis=0), "uniform-mean", 1)
    draw = None if m is None else uniform_draw(d.n, m, rng)
    if name == "ols":
        return fit_ols(d, draw)
    if name == "ridge":
        return fit_ridge(d, cfg.get("lam", 1e-3), draw)
    if name == "lasso":
        return fit_lasso(d, cfg.get("lam"), draw, tol=cfg.get("tol", 1e-8))
    raise InvalidArgument(f"unknown method {name!r}; expected one of {METHOD_NAMES}")


# -- experiment ------------------------------------------------------------


@dataclass
class ExperimentSpec:
    env: EnvironmentSpec
    methods: list = field(default_factory=lambda: [{"name": "ais"}, {"name": "stratified"}, {"name": "uniform-subsample"}])
    m_grid: list = field(default_factory=lambda: [200, 400, 800])
    replicates: int = 10
    seed: int = 0
    outputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.env, dict):
            self.env = EnvironmentSpec.from_dict(self.env)
        self.methods = [{"name": m} if isinstance(m, str) else dict(m) for m in self.methods]
        self.m_grid = [int(m) for m in self.m_grid]
        self.validate()

    def validate(self):
        if self.replicates < 1:
            raise InvalidArgument("replicates must be >= 1")
        if list(self.m_grid) != sorted(self.m_grid):
            raise InvalidArgument("m_grid must be sorted ascending")
        if any(m < 1 or m > self.env.n for m in self.m_grid):
            raise InvalidArgument("every m in m_grid must lie in [1, n]")
        if not self.methods:
            raise InvalidArgument("at least one method is required")
        labels = [_method_label(c) for c in self.methods]
        if len(set(labels)) != len(labels):
            raise InvalidArgument("method labels must be unique (use 'label' to disambiguate)")
        for c in self.methods:
            if c.get("name") not in METHOD_NAMES:
                raise InvalidArgument(f"unknown method {c.get('name')!r}")
        SeededRng(self.seed)

    def to_dict(self) -> dict:
        return {
            "env": self.env.to_dict(),
            "methods": self.methods,
            "m_grid": self.m_grid,
            "replicates": self.replicates,
            "seed": self.seed,
            "outputs": self.outputs,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        known = {"env", "methods", "m_grid", "replicates", "seed", "outputs"}
        extra = set(d) - known
        if extra:
            raise InvalidArgument(f"unknown experiment keys: {sorted(extra)}")
        return cls(**d)


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "0")
    try:
        k = int(raw)
    except ValueError:
        raise InvalidArgument(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if k < 0:
        raise InvalidArgument(f"{THREADS_ENV} must be >= 0")
    return k or min(8, os.cpu_count() or 1)


def _run_replicate(spec: ExperimentSpec, r: int) -> list[dict]:
    base = SeededRng(spec.seed, r)
    d = generate(spec.env, base.spawn(0))
    cells = []
    for i, mcfg in enumerate(spec.methods):
        sizes = [None] if _is_full(mcfg) else spec.m_grid
        for j, m in enumerate(sizes):
            rng = base.spawn(1, i, j)
            cell = {
                "method": _method_label(mcfg),
                "m": d.n if m is None else m,
                "replicate": r,
                "stream": rng.key,
            }
            t0 = time.perf_counter()
            try:
                res = run_method(mcfg, d, m, rng)
                cell.update(
                    ok=True,
                    mse=mse(res.theta, d.truth),
                    error=float(np.linalg.norm(res.theta - d.truth)),
                    warnings=len(res.warnings),
                )
            except Exception as exc:  # a failed fit is recorded, never fatal
                cell.update(ok=False, mse=None, error=None, warnings=0, failure=f"{type(exc).__name__}: {exc}")
            cell["wall_ms"] = (time.perf_counter() - t0) * 1e3
            cells.append(cell)
    return cells


def _stats(v) -> dict:
    a = np.asarray(v, dtype=np.float64)
    if a.size == 0:
        return {"mean": None, "median": None, "std": None}
    return {"mean": float(a.mean()), "median": float(np.median(a)), "std": float(a.std(ddof=1)) if a.size > 1 else 0.0}


def run_experiment(spec: ExperimentSpec, threads: int | None = None) -> dict:
    """Run the full sweep and return the report as a JSON-ready dict."""
    k = _threads() if threads is None else max(1, threads)
    reps = range(spec.replicates)
    if k > 1 and spec.replicates > 1:
        with ThreadPoolExecutor(max_workers=k) as pool:
            per_rep = list(pool.map(lambda r: _run_replicate(spec, r), reps))
    else:
        per_rep = [_run_replicate(spec, r) for r in reps]
    cells = sorted((c for rep in per_rep for c in rep), key=lambda c: (c["replicate"], c["method"], c["m"]))
    return build_report(spec, cells)


def build_report(spec: ExperimentSpec, cells: list[dict]) -> dict:
    """Aggregate cells; the result does not depend on the order of ``cells``."""
    cells = sorted(cells, key=lambda c: (c["replicate"], c["method"], c["m"]))
    groups: dict[tuple, list] = {}
    for c in cells:
        groups.setdefault((c["method"], c["m"]), []).append(c)
    summary, per_method = [], []
    for (method, m), cs in sorted(groups.items()):
        ok = [c for c in cs if c["ok"]]
        ms = sorted(c["mse"] for c in ok)
        es = sorted(c["error"] for c in ok)
        row = {"method": method, "m": m, "n_ok": len(ok), "n_failed": len(cs) - len(ok)}
        row.update({f"mse_{k}": v for k, v in _stats(ms).items()})
        row["error_median"] = float(np.median(es)) if es else None
        summary.append(row)
        walls = sorted(c["wall_ms"] for c in cs)
        per_method.append({"method": method, "m": m, **{f"wall_ms_{k}": v for k, v in _stats(walls).items()}})
    rates = {}
    for method in sorted({c["method"] for c in cells}):
        pts = [(r["m"], r["error_median"]) for r in summary if r["method"] == method and r["error_median"]]
        if len(pts) >= 3 and all(e > 0 for _, e in pts):
            slope, intercept, r2 = fit_rate(pts)
            rates[method] = {"slope": slope, "intercept": intercept, "r2": r2}
    return {
        "schema": SCHEMA,
        "library": {"name": "robust_subsample", "version": __version__},
        "rng": RNG_ALGORITHM,
        "seed": spec.seed,
        "spec": spec.to_dict(),
        "cells": [{k: v for k, v in c.items() if k != "wall_ms"} for c in cells],
        "summary": summary,
        "rate_fits": rates,
        "timing": {
            "per_method": per_method,
            "per_cell": [{k: c[k] for k in ("method", "m", "replicate", "wall_ms")} for c in cells],
        },
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def strip_volatile(report: dict) -> dict:
    """Copy of ``report`` without the wall-clock dependent fields."""
    return {k: v for k, v in report.items() if k not in ("timestamp", "timing")}


def summary_csv(report: dict) -> str:
    """Per-cell CSV ``method,m,replicate,mse,wall_ms`` for plotting."""
    walls = {(c["method"], c["m"], c["replicate"]): c["wall_ms"] for c in report.get("timing", {}).get("per_cell", [])}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "m", "replicate", "mse", "wall_ms"])
    for c in report["cells"]:
        wall = walls.get((c["method"], c["m"], c["replicate"]))
        w.writerow([c["method"], c["m"], c["replicate"], "" if c["mse"] is None else repr(c["mse"]), "" if wall is None else f"{wall:.3f}"])
    return buf.getvalue()
