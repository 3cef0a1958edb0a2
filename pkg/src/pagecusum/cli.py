"""Command-line entry point.

Subcommands: critvals, asymptotics, limit-cdf, generate, simulate, density,
monitor, table1. Scalar results are printed as single-line JSON; tabular and
sample results are written as CSV. Exit codes: 0 success, 2 validation
error (one-line diagnostic on stderr), 1 runtime failure.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import asymptotics as asym
from . import experiments, wiener
from .datagen import Garch11Spec, StreamSpec, generate_garch11, generate_stream
from .detectors import run_monitor
from .model import (ChangeScenario, MonitoringParams, ValidationError,
                    _require)
from .rng import rng_stream

_SIDE_FLAG = {"one": "one_sided", "two": "two_sided"}

# config schemas: key -> caster
_GENERATE_KEYS = {
    "omega": float, "alpha": float, "beta": float, "burn_in": int,
    "mu": float, "delta": float, "theta": float, "beta_exp": float,
    "m": int, "length": int,
}
_SIMULATE_KEYS = {
    "m": int, "gamma": float, "alpha": float, "side": str, "detector": str,
    "delta": float, "mu": float, "theta": float, "beta_exp": float,
    "kstar": int, "horizon_factor": float, "reps": int, "seed": int,
    "grid": int, "omega": float, "alpha_garch": float, "beta_garch": float,
    "burn_in": int, "c_page": float, "c_q": float,
}


def _read_config(path, schema) -> dict:
    """Flat key=value file; '#' comments allowed; unknown keys rejected."""
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected key=value")
            key, val = (part.strip() for part in line.split("=", 1))
            if key not in schema:
                raise ValidationError(f"{path}:{lineno}: unknown key '{key}'")
            try:
                cfg[key] = schema[key](val)
            except ValueError as exc:
                raise ValidationError(
                    f"{path}:{lineno}: bad value for '{key}': {exc}") from None
    return cfg


def _read_series_csv(path) -> np.ndarray:
    """Single column of decimal values, optional header 'x'."""
    values = []
    with open(path, newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or not row[0].strip():
                continue
            cell = row[0].strip()
            if i == 0 and cell.lower() == "x":
                continue
            try:
                values.append(float(cell))
            except ValueError:
                raise ValidationError(
                    f"{path}: non-numeric value '{cell}'") from None
    _require(len(values) > 0, f"{path}: no data values")
    return np.asarray(values)


def _print_json(payload: dict) -> None:
    print(json.dumps(payload))


def _side_from_flag(flag: str) -> str:
    _require(flag in _SIDE_FLAG, "side must be 'one' or 'two'")
    return _SIDE_FLAG[flag]


def _cmd_critvals(args) -> int:
    est = wiener.estimate_critical_value(
        gamma=args.gamma, alpha=args.alpha, side=_side_from_flag(args.side),
        detector=args.detector, reps=args.reps, T=args.grid, seed=args.seed,
        threads=args.threads)
    if args.out:
        wiener.save_estimate(est, args.out)
    _print_json(est.to_json_dict())
    return 0


def _scenario_from_args(args) -> ChangeScenario:
    if args.kstar is not None:
        _require(args.theta is None and args.beta is None,
                 "give either --kstar or --theta/--beta, not both")
        return ChangeScenario.at_kstar(args.delta, args.kstar,
                                       sigma=args.sigma)
    _require(args.theta is not None and args.beta is not None,
             "need --kstar or both --theta and --beta")
    return ChangeScenario.from_exponent(args.delta, args.theta, args.beta,
                                        args.m, sigma=args.sigma)


def _cmd_asymptotics(args) -> int:
    scenario = _scenario_from_args(args)
    norm = asym.compute_normalization(args.c, args.m, scenario, args.gamma)
    payload = {"a_m": norm.a_m, "b_m": norm.b_m, "case": norm.case.variant}
    if norm.case.d1 is not None:
        payload["d1"] = norm.case.d1
    if args.x is not None:
        payload["N"] = asym.compute_N(args.m, args.x, args.c, scenario.kstar,
                                      scenario.delta, scenario.sigma,
                                      args.gamma, norm.a_m)
    _print_json(payload)
    return 0


def _cmd_limit_cdf(args) -> int:
    if args.case == "II":
        _require(args.d1 is not None, "case II needs --d1")
        law = asym.LimitLaw.for_variant("II", d1=args.d1)
    else:
        _require(args.d1 is None, "--d1 applies to case II only")
        law = asym.LimitLaw.for_variant(args.case)
    _print_json({"psi_upper": asym.limit_cdf_upper(args.x, law),
                 "psi": asym.limit_cdf(args.x, law)})
    return 0


def _cmd_generate(args) -> int:
    cfg = _read_config(args.spec, _GENERATE_KEYS)
    for key in ("omega", "m", "length"):
        _require(key in cfg, f"config must set '{key}'")
    garch = Garch11Spec(omega=cfg["omega"], alpha_g=cfg.get("alpha", 0.0),
                        beta_g=cfg.get("beta", 0.0),
                        burn_in=cfg.get("burn_in", 500))
    m = cfg["m"]
    length = args.n if args.n is not None else cfg["length"]
    delta = cfg.get("delta", 0.0)
    scenario = None
    if delta != 0.0:
        scenario = ChangeScenario.from_exponent(
            delta, cfg.get("theta", 1.0), cfg.get("beta_exp", 0.0), m)
    spec = StreamSpec(mu=cfg.get("mu", 0.0), scenario=scenario, m=m,
                      length=length)
    innovations = generate_garch11(garch, m + length, rng_stream(args.seed, 0))
    training, stream = generate_stream(spec, innovations)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x"])
        for v in np.concatenate([training, stream]):
            writer.writerow([repr(float(v))])
    print(f"wrote {m + length} values to {args.out}")
    return 0


def _resolve_pair(cfg, gamma, alpha, side, cache_dir):
    c_page = cfg.get("c_page")
    if c_page is None:
        c_page = wiener.resolve_critical_value(gamma, alpha, side, "page",
                                               cache_dir)
    c_q = cfg.get("c_q")
    if c_q is None:
        c_q = wiener.resolve_critical_value(gamma, alpha, side, "ordinary",
                                            cache_dir)
    return c_page, c_q


def _cmd_simulate(args) -> int:
    cfg = _read_config(args.config, _SIMULATE_KEYS)
    for key in ("m", "delta", "omega"):
        _require(key in cfg, f"config must set '{key}'")
    _require(cfg["delta"] != 0.0,
             "simulate needs delta != 0 (use the library empirical_size "
             "helper for null-hypothesis size studies)")
    m = cfg["m"]
    params = MonitoringParams(
        m=m, gamma=cfg.get("gamma", 0.0), alpha=cfg.get("alpha", 0.1),
        side=cfg.get("side", "one_sided"),
        detector=cfg.get("detector", "page"),
        horizon_factor=cfg.get("horizon_factor", 20.0))
    if "kstar" in cfg:
        _require("beta_exp" not in cfg,
                 "give either kstar or theta/beta_exp, not both")
        scenario = ChangeScenario.at_kstar(cfg["delta"], cfg["kstar"])
    else:
        scenario = ChangeScenario.from_exponent(
            cfg["delta"], cfg.get("theta", 1.0), cfg.get("beta_exp", 0.0), m)
    garch = Garch11Spec(omega=cfg["omega"],
                        alpha_g=cfg.get("alpha_garch", 0.0),
                        beta_g=cfg.get("beta_garch", 0.0),
                        burn_in=cfg.get("burn_in", 500))
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    reps = cfg.get("reps", 5000)
    c_page, c_q = _resolve_pair(cfg, params.gamma, params.alpha, params.side,
                                args.cache)
    meta = experiments.simulate_to_dir(
        params, scenario, garch, reps, c_page, c_q, seed, args.out,
        mu=cfg.get("mu", 0.0), threads=args.threads)
    print(f"wrote records and densities for {reps} replications to {args.out} "
          f"(no-stop: page {meta['n_nostop_page']}, q {meta['n_nostop_q']})")
    return 0


def _cmd_density(args) -> int:
    records = experiments.read_records_csv(args.records)
    densities = experiments.densities_from_records(records,
                                                   points=args.points)
    _require(len(densities) > 0, "no stopped replications to estimate from")
    os.makedirs(args.out, exist_ok=True)
    for name, est in densities.items():
        fname = {"nu_page": "density_page.csv", "nu_q": "density_q.csv",
                 "nu_tilde": "density_tilde.csv"}[name]
        experiments.write_density_csv(est, os.path.join(args.out, fname))
    print(f"wrote {len(densities)} density files to {args.out}")
    return 0


def _cmd_monitor(args) -> int:
    train = _read_series_csv(args.train)
    stream = _read_series_csv(args.stream)
    params = MonitoringParams(m=train.size, gamma=args.gamma,
                              alpha=args.alpha,
                              side=_side_from_flag(args.side),
                              detector=args.detector,
                              horizon_factor=args.horizon_factor)
    c = args.critical_value
    if c is None:
        c = wiener.resolve_critical_value(params.gamma, params.alpha,
                                          params.side, params.detector,
                                          args.cache)
    result = run_monitor(train, stream, params, c)
    _print_json({"stopped": result.stopped, "tau": result.tau,
                 "stat_at_tau": result.stat,
                 "threshold_at_tau": result.threshold})
    return 0


def _cmd_table1(args) -> int:
    gammas = (0.0, 0.25, 0.45)
    c_page = {g: wiener.resolve_critical_value(g, args.alpha, "one_sided",
                                               "page", args.cache)
              for g in gammas}
    c_q = {g: wiener.resolve_critical_value(g, args.alpha, "one_sided",
                                            "ordinary", args.cache)
           for g in gammas}
    rows = experiments.emit_table1(args.alpha, gammas, None,
                                   (100, 1000, 10000), c_page, c_q,
                                   out_path=args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pagecusum",
        description="Open-end CUSUM / page-CUSUM monitoring toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("critvals",
                       help="simulate a critical value c(gamma, alpha)")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--side", choices=("one", "two"), default="one")
    p.add_argument("--detector", choices=("page", "ordinary"), default="page")
    p.add_argument("--reps", type=int, default=100_000)
    p.add_argument("--grid", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None,
                   help="JSON cache file (requires reps >= 1000)")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_critvals)

    p = sub.add_parser("asymptotics",
                       help="centering/scaling sequences and regime label")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--kstar", type=int, default=None)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--x", type=float, default=None,
                   help="also report the delay-quantile index N(m, x)")
    p.set_defaults(func=_cmd_asymptotics)

    p = sub.add_parser("limit-cdf", help="limit CDF of the normalized delay")
    p.add_argument("--case", choices=("I", "II", "III"), required=True)
    p.add_argument("--d1", type=float, default=None)
    p.add_argument("--x", type=float, required=True)
    p.set_defaults(func=_cmd_limit_cdf)

    p = sub.add_parser("generate",
                       help="write a location-model series as CSV")
    p.add_argument("--spec", required=True, help="key=value config file")
    p.add_argument("--n", type=int, default=None,
                   help="override the monitoring length from the config")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("simulate", help="replication study -> records + densities")
    p.add_argument("--config", required=True, help="key=value config file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None,
                   help="override the seed from the config")
    p.add_argument("--cache", default=None,
                   help="directory of critvals JSON files")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("density", help="re-run KDE on an existing records.csv")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--points", type=int, default=401)
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("monitor", help="run one monitoring pass over CSV data")
    p.add_argument("--train", required=True)
    p.add_argument("--stream", required=True)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--side", choices=("one", "two"), default="one")
    p.add_argument("--detector", choices=("page", "ordinary"), default="page")
    p.add_argument("--critical-value", type=float, default=None)
    p.add_argument("--horizon-factor", type=float, default=20.0)
    p.add_argument("--cache", default=None)
    p.set_defaults(func=_cmd_monitor)

    p = sub.add_parser("table1",
                       help="normalization table over the canonical scenarios")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--cache", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_table1)

    return parser


def dispatch(argv) -> int:
    """Parse argv and run the subcommand; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"failure: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> None:
    sys.exit(dispatch(sys.argv[1:] if argv is None else argv))
