"""Command-line front end: ``generate``, ``estimate``, ``bench``, ``rate-check``.

Exit codes: 0 success, 1 invalid input (the message names the flag), 2 the
estimation failed at runtime or a rate check came out of band.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import __version__
from .ais import AisConfig, run_ais
from .baselines import fit_lasso, fit_ols, fit_ridge, fit_uniform_subsample
from .bench import ExperimentSpec, fit_rate, mse, run_experiment, summary_csv
from .core import EstimationFailure, InvalidArgument, SeededRng, uniform_draw, validate_dataset
from .datagen import EnvironmentSpec, Noise, generate
from .io import atomic_write_text, dumps_json, read_dataset, sidecar_path, write_csv, write_json
from .robust import MomConfig
from .stratified import StratConfig, run_stratified

DEFAULT_SEED = 0
METHODS = ("ais", "stratified", "ols", "ridge", "lasso", "uniform-subsample")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_flag(flag):
    def conv(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{flag} must be an integer, got {text!r}") from None
        return v

    return conv


def _noise(text):
    try:
        return Noise.parse(text)
    except InvalidArgument as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = _Parser(prog="robust-subsample", description="Robust subsampling estimators and benchmarks.", formatter_class=fmt)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed_default=DEFAULT_SEED):
        sp.add_argument("--config", help="JSON file whose keys mirror the flags; flags override it", default=None)
        sp.add_argument("--seed", type=int, default=seed_default, help="64-bit seed for every random draw")

    g = sub.add_parser("generate", help="write a synthetic dataset (CSV + JSON sidecar)", formatter_class=fmt)
    common(g)
    g.add_argument("--n", type=int, default=1000, help="number of observations")
    g.add_argument("--p", type=int, default=10, help="number of features")
    g.add_argument("--s", type=int, default=2, help="number of nonzero true coefficients")
    g.add_argument("--beta-scale", type=float, default=1.0, help="value of each nonzero coefficient")
    g.add_argument(
        "--noise",
        type=_noise,
        default=Noise(),
        help="noise law kind:param[,param]: gaussian:SIGMA, student_t:NU,SIGMA, pareto:ALPHA,SIGMA",
    )
    g.add_argument("--eps", type=float, default=0.0, help="fraction of rows corrupted, in [0, 0.5)")
    g.add_argument("--c-mag", type=float, default=1e3, help="corrupted entries are uniform in [-c, c]")
    g.add_argument("--phi", type=float, default=0.0, help="AR(1) coefficient across rows (0 = iid)")
    g.add_argument("--task", choices=("regression", "mean"), default="regression", help="response model")
    g.add_argument("--out", default=None, help="output CSV path (required)")

    e = sub.add_parser("estimate", help="fit one estimator to a CSV dataset", formatter_class=fmt)
    common(e)
    e.add_argument("--data", default=None, help="input CSV (x1..xp[,y]); a .json sidecar is read if present")
    e.add_argument("--method", choices=METHODS, default="ais", help="estimator")
    e.add_argument("--m", type=_int_flag("--m"), default=None, help="subsample size (default: n for ols/ridge/lasso, else required)")
    e.add_argument("--T", type=int, default=10, help="AIS rounds")
    e.add_argument("--beta", default="auto", help="AIS temperature (number >= 0 or 'auto')")
    e.add_argument("--lambda", dest="mix_lambda", type=float, default=0.05, help="AIS uniform mixing weight")
    e.add_argument("--mode", choices=("with", "without"), default="with", help="AIS draws with or without replacement")
    e.add_argument("--loss", default="squared", help="AIS loss: squared or huber[:DELTA]")
    e.add_argument("--K", type=int, default=10, help="number of strata")
    e.add_argument("--task", choices=("auto", "mean", "regression"), default="auto", help="stratified task")
    e.add_argument("--mom-blocks", type=int, default=None, help="median-of-means blocks per stratum (default floor(sqrt(k)))")
    e.add_argument("--lam", type=float, default=None, help="ridge/lasso penalty (ridge default 1e-3, lasso 0.1 lambda_max)")
    e.add_argument("--out", default=None, help="write the result JSON here instead of stdout")

    b = sub.add_parser("bench", help="run an experiment spec and write a JSON report", formatter_class=fmt)
    common(b, seed_default=None)
    b.add_argument("--spec", default=None, help="experiment spec JSON (required)")
    b.add_argument("--replicates", type=int, default=None, help="override the spec's replicate count")
    b.add_argument("--out", default=None, help="report JSON path (default: stdout)")
    b.add_argument("--csv", default=None, help="per-cell CSV summary path (method,m,replicate,mse,wall_ms)")

    r = sub.add_parser("rate-check", help="fit the log-log error rate from a report or CSV", formatter_class=fmt)
    r.add_argument("--config", default=None, help="JSON file whose keys mirror the flags; flags override it")
    r.add_argument("--report", default=None, help="bench report JSON")
    r.add_argument("--errors", default=None, help="CSV with columns m,error (alternative to --report)")
    r.add_argument("--method", default="ais", help="method label to fit when reading a report")
    r.add_argument("--slope-min", type=float, default=-0.65, help="lower bound of the accepted slope")
    r.add_argument("--slope-max", type=float, default=-0.35, help="upper bound of the accepted slope")
    r.add_argument("--r2-min", type=float, default=0.95, help="minimum accepted R^2")
    return p


def _apply_config(parser, argv):
    """Parse, then re-parse with the config file's values as subparser defaults."""
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    try:
        with open(args.config, encoding="utf-8") as fh:
            conf = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"--config: cannot read {args.config}: {exc}") from None
    if not isinstance(conf, dict):
        raise UsageError("--config: file must hold a JSON object")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    dests = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, val in conf.items():
        dest = key.replace("-", "_").lstrip("_")
        dest = {"lambda": "mix_lambda"}.get(dest, dest)
        if dest not in dests or dest in ("help", "config"):
            raise UsageError(f"--config: unknown key {key!r}")
        action = dests[dest]
        if action.type is not None and isinstance(val, str):
            try:
                val = action.type(val)
            except argparse.ArgumentTypeError as exc:
                raise UsageError(f"--config: {key}: {exc}") from None
        defaults[dest] = val
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _resolved(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        out[k] = str(v) if isinstance(v, Noise) else v
    return out


def _require(args, flag):
    if getattr(args, flag.lstrip("-").replace("-", "_")) is None:
        raise UsageError(f"{flag} is required")


def cmd_generate(args) -> int:
    _require(args, "--out")
    spec = EnvironmentSpec(
        n=args.n, p=args.p, s=args.s, beta_scale=args.beta_scale, noise=args.noise,
        eps=args.eps, c_mag=args.c_mag, phi=args.phi, task=args.task,
    )
    d = generate(spec, SeededRng(args.seed))
    write_csv(d, args.out)
    side = {
        "schema": 1,
        "spec": spec.to_dict(),
        "seed": args.seed,
        "truth": [float(v) for v in d.truth],
        "corrupted": d.meta.get("corrupted", []),
        "meta": {k: v for k, v in d.meta.items() if k != "spec"},
        "config": _resolved(args),
    }
    write_json(side, sidecar_path(args.out))
    print(f"wrote {args.out} ({d.n} x {d.p}) and {sidecar_path(args.out)}", file=sys.stderr)
    return 0


def _estimate(args, d):
    rng = SeededRng(args.seed)
    m = args.m
    if args.method in ("ais", "stratified", "uniform-subsample") and m is None:
        raise UsageError("--m is required for this method")
    if m is not None and m < 1:
        raise UsageError("--m: m must be ≥ 1")
    if m is not None and m > d.n:
        raise UsageError(f"--m: m={m} exceeds n={d.n}")
    if args.method == "ais":
        beta = args.beta if args.beta == "auto" else _float_flag("--beta", args.beta)
        cfg = AisConfig(m=m, T=args.T, beta=beta, loss=args.loss, mix_lambda=args.mix_lambda, replace=args.mode == "with")
        return run_ais(d, cfg, rng)
    if args.method == "stratified":
        mom = MomConfig(args.mom_blocks)
        return run_stratified(d, StratConfig(m=m, K=args.K, task=args.task, mom=mom), rng)
    if args.method == "uniform-subsample":
        return fit_uniform_subsample(d, m, rng)
    draw = None if m is None or m == d.n else uniform_draw(d.n, m, rng)
    if args.method == "ols":
        return fit_ols(d, draw)
    if args.method == "ridge":
        return fit_ridge(d, 1e-3 if args.lam is None else args.lam, draw)
    return fit_lasso(d, args.lam, draw)


def _float_flag(flag, text):
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"{flag}: expected a number or 'auto', got {text!r}") from None


def cmd_estimate(args) -> int:
    _require(args, "--data")
    try:
        d = read_dataset(args.data)
    except OSError as exc:
        raise UsageError(f"--data: {exc}") from None
    problems = validate_dataset(d)
    if problems:
        raise UsageError("--data: " + "; ".join(problems[:5]))
    res = _estimate(args, d)
    out = {"schema": 1, "result": res.to_dict(), "config": _resolved(args), "n": d.n, "p": d.p}
    if d.truth is not None and d.truth.shape[0] == d.p:
        out["mse"] = mse(res.theta, d.truth)
        out["error"] = float(np.linalg.norm(res.theta - d.truth))
    if args.out:
        write_json(out, args.out)
    else:
        sys.stdout.write(dumps_json(out))
    return 0


def cmd_bench(args) -> int:
    _require(args, "--spec")
    try:
        with open(args.spec, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"--spec: cannot read {args.spec}: {exc}") from None
    if args.seed is not None:
        raw["seed"] = args.seed
    if "seed" not in raw:
        raise UsageError("--seed is required (or a 'seed' key in the spec)")
    if args.replicates is not None:
        raw["replicates"] = args.replicates
    spec = ExperimentSpec.from_dict(raw)
    report = run_experiment(spec)
    report["config"] = _resolved(args)
    if args.out:
        write_json(report, args.out)
    else:
        sys.stdout.write(dumps_json(report))
    if args.csv:
        atomic_write_text(args.csv, summary_csv(report))
    return 0


def _read_errors_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or not {"m", "error"} <= set(rows[0]):
        raise UsageError("--errors: CSV needs columns m,error")
    return [(float(r["m"]), float(r["error"])) for r in rows]


def cmd_rate_check(args) -> int:
    if bool(args.report) == bool(args.errors):
        raise UsageError("exactly one of --report or --errors is required")
    if args.errors:
        pts = _read_errors_csv(args.errors)
    else:
        with open(args.report, encoding="utf-8") as fh:
            report = json.load(fh)
        pts = [(r["m"], r["error_median"]) for r in report["summary"] if r["method"] == args.method and r["error_median"]]
        if not pts:
            raise UsageError(f"--method: no summary rows for {args.method!r}")
    slope, intercept, r2 = fit_rate(pts)
    ok = args.slope_min <= slope <= args.slope_max and r2 >= args.r2_min
    print(json.dumps({"slope": slope, "intercept": intercept, "r2": r2, "pass": ok}, sort_keys=True))
    return 0 if ok else 2


COMMANDS = {"generate": cmd_generate, "estimate": cmd_estimate, "bench": cmd_bench, "rate-check": cmd_rate_check}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if getattr(args, "seed", None) is not None and args.command != "bench":
            print(f"seed={args.seed}", file=sys.stderr)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InvalidArgument as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (EstimationFailure, np.linalg.LinAlgError) as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
