"""Replication harness: paired stopping times, normalized delays, empirical
sizes, density estimates, and the normalization table.

Every replication draws a fresh GARCH training sample and monitoring stream
from its own RNG stream, runs the page and ordinary detectors on the same
data, and records the stopping times together with their normalized versions

    nu_page  = (tau_page - a_m(c_page)) / b_m(c_page)
    nu_q     = (tau_q    - a_m(c_q))    / b_m(c_q)
    nu_tilde = (tau_q    - a_m(c_page)) / b_m(c_page),

nu_tilde being the ordinary stopping time under the page normalization, the
natural benchmark for comparing the two rules on one scale.
"""

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .asymptotics import compute_b_m, compute_normalization, solve_a_m
from .datagen import Garch11Spec, generate_garch11_batch
from .detectors import boundary_g
from .model import (ChangeScenario, MonitoringParams, ValidationError,
                    _require, resolve_kstar, validate_scenario)

_BLOCK = 125  # replications per work unit (fixed: batching never changes data)


@dataclass(frozen=True)
class ReplicationRecord:
    """Stopping times and normalized delays of one replication.

    tau fields are None when the detector did not stop within the horizon
    (or training was degenerate); the matching nu fields are then None too.
    """

    rep: int
    tau_page: int | None
    tau_q: int | None
    nu_page: float | None
    nu_q: float | None
    nu_tilde: float | None


def _stats_for_side(q: np.ndarray, side: str):
    """(page_stat, ordinary_stat) paths from a Q path (vectorized)."""
    prev = np.concatenate(([0.0], q))
    q_min = np.minimum.accumulate(prev)[1:]
    if side == "two_sided":
        q_max = np.maximum.accumulate(prev)[1:]
        return np.maximum(q - q_min, q_max - q), np.abs(q)
    return q - q_min, q


def _first_crossing(stat: np.ndarray, thresh: np.ndarray) -> int | None:
    hits = np.nonzero(stat >= thresh)[0]
    return int(hits[0]) + 1 if hits.size else None


def _replication_block(args):
    """Records for replications [start, start + count)."""
    (params, scenario, garch, mu, c_page, c_q, norms, seed, start,
     count) = args
    a_page, b_page, a_q, b_q = norms
    m, horizon = params.m, params.horizon
    n = m + horizon
    g = boundary_g(m, np.arange(1, horizon + 1), params.gamma)
    eps = generate_garch11_batch(garch, n, count, seed, first_stream=start)
    out = []
    shift_at = m + scenario.kstar - 1  # 0-based position of the first shifted point
    for i in range(count):
        x = mu + eps[i]
        if shift_at < n:
            x[shift_at:] += scenario.delta
        train, stream = x[:m], x[m:]
        sd = float(train.std(ddof=1))
        if not sd > 0.0:
            out.append(ReplicationRecord(start + i, None, None, None, None, None))
            continue
        q = np.cumsum(stream - train.mean())
        stat_page, stat_q = _stats_for_side(q, params.side)
        tau_page = _first_crossing(stat_page, sd * c_page * g)
        tau_q = _first_crossing(stat_q, sd * c_q * g)
        nu_page = (tau_page - a_page) / b_page if tau_page is not None else None
        nu_q = (tau_q - a_q) / b_q if tau_q is not None else None
        nu_tilde = (tau_q - a_page) / b_page if tau_q is not None else None
        out.append(ReplicationRecord(start + i, tau_page, tau_q,
                                     nu_page, nu_q, nu_tilde))
    return out


def run_replications(params: MonitoringParams, scenario: ChangeScenario,
                     garch: Garch11Spec, reps: int, c_page: float,
                     c_q: float, seed: int, mu: float = 0.0,
                     threads: int = 1) -> list[ReplicationRecord]:
    """Run both stopping rules over fresh data in each replication.

    Deterministic given seed: replication r always uses RNG stream (seed, r),
    so the result is identical for any thread count or block size.
    """
    _require(reps >= 1, "reps must be positive")
    _require(c_page > 0.0 and c_q > 0.0, "critical values must be positive")
    validate_scenario(scenario, params.m)
    a_page = solve_a_m(c_page, params.m, scenario.kstar, scenario.delta,
                       scenario.sigma, params.gamma)
    b_page = compute_b_m(a_page, scenario.delta, scenario.sigma, params.gamma,
                         scenario.kstar)
    a_q = solve_a_m(c_q, params.m, scenario.kstar, scenario.delta,
                    scenario.sigma, params.gamma)
    b_q = compute_b_m(a_q, scenario.delta, scenario.sigma, params.gamma,
                      scenario.kstar)
    norms = (a_page, b_page, a_q, b_q)
    blocks = [(params, scenario, garch, mu, c_page, c_q, norms, seed, start,
               min(_BLOCK, reps - start)) for start in range(0, reps, _BLOCK)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_replication_block, blocks))
    else:
        parts = [_replication_block(b) for b in blocks]
    records = [rec for part in parts for rec in part]
    records.sort(key=lambda r: r.rep)
    return records


def _size_block(args):
    """Number of null-hypothesis stops among replications [start, start+count)."""
    params, garch, mu, c, seed, start, count = args
    m, horizon = params.m, params.horizon
    n = m + horizon
    g = boundary_g(m, np.arange(1, horizon + 1), params.gamma)
    eps = generate_garch11_batch(garch, n, count, seed, first_stream=start)
    stopped = 0
    for i in range(count):
        x = mu + eps[i]
        train, stream = x[:m], x[m:]
        sd = float(train.std(ddof=1))
        if not sd > 0.0:
            continue
        q = np.cumsum(stream - train.mean())
        stat_page, stat_q = _stats_for_side(q, params.side)
        stat = stat_page if params.detector == "page" else stat_q
        if np.any(stat >= sd * c * g):
            stopped += 1
    return stopped


def empirical_size(params: MonitoringParams, garch: Garch11Spec, reps: int,
                   c: float, seed: int, mu: float = 0.0,
                   threads: int = 1) -> float:
    """Fraction of change-free replications that stop within the horizon.

    No shift is injected (the null hypothesis), so this estimates the
    truncated false-alarm probability; enlarging the horizon can only
    increase it, toward the open-end level alpha.
    """
    _require(reps >= 1, "reps must be positive")
    _require(c > 0.0, "critical value must be positive")
    blocks = [(params, garch, mu, c, seed, start, min(_BLOCK, reps - start))
              for start in range(0, reps, _BLOCK)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            counts = list(pool.map(_size_block, blocks))
    else:
        counts = [_size_block(b) for b in blocks]
    return sum(counts) / reps


@dataclass(frozen=True)
class DensityEstimate:
    """Gaussian-kernel density estimate on a uniform grid."""

    grid: np.ndarray
    density: np.ndarray
    bandwidth: float
    n: int


def kde(samples, grid_lo: float, grid_hi: float,
        points: int = 401) -> DensityEstimate:
    """Gaussian KDE with Silverman bandwidth 0.9*min(sd, IQR/1.34)*n**(-1/5).

    Falls back to 0.9*sd*n**(-1/5) when the IQR is zero. Rejects samples with
    zero spread. The grid must cover (essentially) all the mass for the
    density to integrate to ~1 over it.
    """
    x = np.asarray(samples, dtype=float)
    _require(x.ndim == 1 and x.size >= 2, "need at least 2 samples")
    _require(grid_hi > grid_lo, "grid_hi must exceed grid_lo")
    _require(points >= 2, "points must be >= 2")
    sd = float(x.std(ddof=1))
    if not sd > 0.0:
        raise ValidationError("degenerate sample: zero spread")
    q75, q25 = np.percentile(x, [75.0, 25.0])
    iqr = float(q75 - q25)
    spread = min(sd, iqr / 1.34) if iqr > 0.0 else sd
    h = 0.9 * spread * x.size ** (-0.2)
    grid = np.linspace(grid_lo, grid_hi, points)
    dens = np.zeros(points)
    norm = 1.0 / (x.size * h * math.sqrt(2.0 * math.pi))
    for start in range(0, x.size, 4096):
        chunk = x[start:start + 4096]
        z = (grid[None, :] - chunk[:, None]) / h
        dens += np.exp(-0.5 * z * z).sum(axis=0)
    return DensityEstimate(grid=grid, density=dens * norm, bandwidth=h,
                           n=int(x.size))


# canonical layout of the normalization table: change-time rule, how kstar is
# derived from m, and the gamma values the rule is reported at
TABLE1_RULES = (
    ("1", "fixed", 1.0, (0.0, 0.25, 0.45)),
    ("100", "fixed", 100.0, (0.0, 0.25, 0.45)),
    ("m^0.45", "power", 0.45, (0.0, 0.25, 0.45)),
    ("m^0.5", "power", 0.5, (0.0,)),
    ("m^(1/3)", "power", 1.0 / 3.0, (0.25,)),
    ("m^(1/11)", "power", 1.0 / 11.0, (0.45,)),
    ("m^0.75", "power", 0.75, (0.0, 0.25, 0.45)),
)

TABLE1_COLUMNS = ("rule", "gamma", "m", "kstar", "a_page", "b_page",
                  "a_q", "b_q")


def emit_table1(alpha: float, gammas, scenarios, m_values,
                c_page_by_gamma: dict, c_q_by_gamma: dict,
                delta: float = 1.0, sigma: float = 1.0,
                out_path=None) -> list[dict]:
    """Normalization table rows for both stopping rules.

    scenarios is a sequence of (label, kind, value, applicable_gammas) rules
    (kind "fixed": kstar = value; kind "power": kstar = floor(m**value)), or
    None for the canonical layout. Rows are emitted for each rule, each
    applicable gamma in `gammas`, and each m. alpha only documents which
    level the supplied critical values correspond to.
    """
    _require(0.0 < alpha < 1.0, "alpha must lie in (0, 1)")
    rules = TABLE1_RULES if scenarios is None else scenarios
    gammas = tuple(gammas)
    rows = []
    for label, kind, value, rule_gammas in rules:
        for gamma in rule_gammas:
            if gamma not in gammas:
                continue
            for m in m_values:
                kstar = int(value) if kind == "fixed" \
                    else resolve_kstar(1.0, value, m)
                row = {"rule": label, "gamma": gamma, "m": int(m),
                       "kstar": kstar}
                for tag, c in (("page", c_page_by_gamma[gamma]),
                               ("q", c_q_by_gamma[gamma])):
                    a = solve_a_m(c, m, kstar, delta, sigma, gamma)
                    b = compute_b_m(a, delta, sigma, gamma, kstar)
                    row[f"a_{tag}"] = a
                    row[f"b_{tag}"] = b
                rows.append(row)
    if out_path is not None:
        with open(out_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(TABLE1_COLUMNS)
            for row in rows:
                writer.writerow([row["rule"], repr(row["gamma"]), row["m"],
                                 row["kstar"], f"{row['a_page']:.6f}",
                                 f"{row['b_page']:.6f}", f"{row['a_q']:.6f}",
                                 f"{row['b_q']:.6f}"])
    return rows


RECORD_COLUMNS = ("rep", "tau_page", "tau_q", "nu_page", "nu_q", "nu_tilde")


def write_records_csv(records, path) -> None:
    """records.csv with the exact header rep,tau_page,tau_q,nu_page,nu_q,nu_tilde.

    Floats are written with repr so parsing restores them exactly; missing
    values are empty fields.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_COLUMNS)
        for r in records:
            writer.writerow([
                r.rep,
                "" if r.tau_page is None else r.tau_page,
                "" if r.tau_q is None else r.tau_q,
                "" if r.nu_page is None else repr(r.nu_page),
                "" if r.nu_q is None else repr(r.nu_q),
                "" if r.nu_tilde is None else repr(r.nu_tilde),
            ])


def read_records_csv(path) -> list[ReplicationRecord]:
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _require(reader.fieldnames == list(RECORD_COLUMNS),
                 f"unexpected records header: {reader.fieldnames}")
        for row in reader:
            records.append(ReplicationRecord(
                rep=int(row["rep"]),
                tau_page=int(row["tau_page"]) if row["tau_page"] else None,
                tau_q=int(row["tau_q"]) if row["tau_q"] else None,
                nu_page=float(row["nu_page"]) if row["nu_page"] else None,
                nu_q=float(row["nu_q"]) if row["nu_q"] else None,
                nu_tilde=float(row["nu_tilde"]) if row["nu_tilde"] else None,
            ))
    return records


def _density_grid(values):
    lo = float(np.min(values)) - 1.0
    hi = float(np.max(values)) + 1.0
    return lo, hi


def write_density_csv(est: DensityEstimate, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("x", "density"))
        for x, d in zip(est.grid, est.density):
            writer.writerow([repr(float(x)), repr(float(d))])


def densities_from_records(records, points: int = 401):
    """KDE estimates for nu_page / nu_q / nu_tilde, skipping no-stop records."""
    out = {}
    for name in ("nu_page", "nu_q", "nu_tilde"):
        vals = np.array([getattr(r, name) for r in records
                         if getattr(r, name) is not None])
        if vals.size >= 2 and vals.std(ddof=1) > 0.0:
            lo, hi = _density_grid(vals)
            out[name] = kde(vals, lo, hi, points)
    return out


def simulate_to_dir(params: MonitoringParams, scenario: ChangeScenario,
                    garch: Garch11Spec, reps: int, c_page: float, c_q: float,
                    seed: int, out_dir, mu: float = 0.0, threads: int = 1,
                    density_points: int = 401) -> dict:
    """Full replication study: records.csv, density_*.csv and meta.json."""
    os.makedirs(out_dir, exist_ok=True)
    records = run_replications(params, scenario, garch, reps, c_page, c_q,
                               seed, mu=mu, threads=threads)
    write_records_csv(records, os.path.join(out_dir, "records.csv"))
    densities = densities_from_records(records, points=density_points)
    for name, est in densities.items():
        fname = {"nu_page": "density_page.csv", "nu_q": "density_q.csv",
                 "nu_tilde": "density_tilde.csv"}[name]
        write_density_csv(est, os.path.join(out_dir, fname))
    norm_page = compute_normalization(c_page, params.m, scenario, params.gamma)
    norm_q = compute_normalization(c_q, params.m, scenario, params.gamma)
    meta = {
        "m": params.m, "gamma": params.gamma, "alpha": params.alpha,
        "side": params.side, "horizon_factor": params.horizon_factor,
        "horizon": params.horizon, "reps": reps, "seed": seed, "mu": mu,
        "delta": scenario.delta, "kstar": scenario.kstar,
        "theta": scenario.theta, "beta": scenario.beta,
        "sigma": scenario.sigma,
        "garch": {"omega": garch.omega, "alpha_g": garch.alpha_g,
                  "beta_g": garch.beta_g, "burn_in": garch.burn_in},
        "c_page": c_page, "c_q": c_q,
        "a_page": norm_page.a_m, "b_page": norm_page.b_m,
        "a_q": norm_q.a_m, "b_q": norm_q.b_m,
        "case": {"variant": norm_page.case.variant,
                 "eta": norm_page.case.eta,
                 "d1": norm_page.case.d1, "c1": norm_page.case.c1},
        "n_nostop_page": sum(1 for r in records if r.tau_page is None),
        "n_nostop_q": sum(1 for r in records if r.tau_q is None),
        "records_file": "records.csv",
    }
    with open(os.path.join(out_dir, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return meta
