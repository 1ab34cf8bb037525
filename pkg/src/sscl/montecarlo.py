"""Ensembles over driving paths, expectation traces and decay-rate fits.

Replica seeds derive from (base_seed, replica index), aggregation runs in
replica order, and workers share no state, so ensemble output is bitwise
reproducible and independent of the parallelism degree.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .config import (ExperimentConfig, make_flux, make_initial, make_path,
                     make_record_options, replica_seed, with_cells)
from .errors import NumericalFailure
from .pathwise import solve


@dataclass
class EnsembleTrace:
    """Per-time means and standard errors of the recorded norms."""

    times: np.ndarray
    means: dict
    stderrs: dict
    n_replicas: int
    seeds: list
    ledger_tv: np.ndarray = None
    ledger_neg: np.ndarray = None


@dataclass
class RateFit:
    """Log-log regression of a norm trace against time."""

    window: tuple
    slope: float
    intercept: float
    r_squared: float
    slope_ci: tuple
    truncated: bool = False


def _run_replica(args):
    cfg, index = args
    seed = replica_seed(cfg, index)
    flux = make_flux(cfg)
    u0 = make_initial(cfg)
    path = make_path(cfg, seed=seed)
    record = make_record_options(cfg)
    rec = solve(u0, flux, path, record=record, seed=seed,
                source_coeff=cfg.source_coeff)
    tv = rec.ledger.total_variation() if rec.ledger is not None else 0.0
    neg = (float(np.sum(rec.ledger.mass_neg))
           if rec.ledger is not None else 0.0)
    return rec.times, rec.norms, tv, neg, seed


def run_ensemble(cfg: ExperimentConfig, n_replicas: int,
                 base_seed: int | None = None) -> EnsembleTrace:
    """Solve n_replicas independent paths and aggregate the norm traces.

    A numerical failure in any replica aborts the ensemble, reporting the
    failing seed.
    """
    if n_replicas < 1:
        raise ValueError("need at least one replica")
    if base_seed is not None:
        cfg = replace(cfg, seed=int(base_seed))
    tasks = [(cfg, i) for i in range(n_replicas)]
    threads = cfg.threads if cfg.threads > 0 else (os.cpu_count() or 1)
    try:
        if threads > 1 and n_replicas > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(_run_replica, tasks))
        else:
            results = [_run_replica(t) for t in tasks]
    except NumericalFailure as exc:
        raise NumericalFailure(
            f"ensemble aborted: replica seed {exc.seed} failed at "
            f"t={exc.time}", time=exc.time, seed=exc.seed) from exc

    times = results[0][0]
    keys = list(results[0][1].keys())
    means, errs = {}, {}
    for key in keys:
        stack = np.stack([r[1][key] for r in results])
        means[key] = stack.mean(axis=0)
        errs[key] = (stack.std(axis=0, ddof=1) / np.sqrt(n_replicas)
                     if n_replicas > 1 else np.zeros(stack.shape[1]))
    return EnsembleTrace(times=times, means=means, stderrs=errs,
                         n_replicas=n_replicas,
                         seeds=[r[4] for r in results],
                         ledger_tv=np.array([r[2] for r in results]),
                         ledger_neg=np.array([r[3] for r in results]))


def fit_rate(trace: EnsembleTrace, norm: str = "l1_to_mean",
             window=(1.0, None)) -> RateFit:
    """Least squares on (log t, log mean) inside the window.

    The fitted slope's 95% interval propagates the per-time standard
    errors by the delta method.  Times with non-positive means truncate
    the window (the trace hit the attractor) and set the flag.
    """
    tmin = float(window[0])
    tmax = float(window[1]) if window[1] else float(trace.times[-1])
    if tmin < 1.0:
        raise ValueError("rate windows start at t >= 1")
    sel = (trace.times >= tmin * (1 - 1e-12)) & \
          (trace.times <= tmax * (1 + 1e-12))
    t = trace.times[sel]
    y = trace.means[norm][sel]
    se = trace.stderrs[norm][sel]
    truncated = False
    bad = np.nonzero(y <= 0)[0]
    if len(bad):
        t, y, se = t[:bad[0]], y[:bad[0]], se[:bad[0]]
        truncated = True
    if len(t) < 6:
        raise ValueError("need at least 6 recorded times with positive "
                         "means inside the window")
    lx, ly = np.log(t), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    fitted = slope * lx + intercept
    ss_res = float(np.sum((ly - fitted) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    cx = lx - lx.mean()
    denom = float(np.sum(cx * cx))
    var_log = (se / y) ** 2
    var_slope = float(np.sum((cx / denom) ** 2 * var_log))
    half = 1.96 * np.sqrt(var_slope)
    return RateFit(window=(tmin, tmax), slope=float(slope),
                   intercept=float(intercept), r_squared=r2,
                   slope_ci=(float(slope - half), float(slope + half)),
                   truncated=truncated)


@dataclass
class RegularityRow:
    lam: float
    level: int
    value: float


def regularity_study(cfg: ExperimentConfig, lambdas, grid_levels,
                     n_replicas: int):
    """Time-integrated expected W^{lambda,1} norms across grid levels.

    Replica paths are identical across levels (seeds do not depend on the
    grid), so rows are directly comparable; the returned table carries
    E int ||u(t)||_{W^{lambda,1}} dt per (lambda, level) by trapezoid over
    the recorded times.
    """
    rows = []
    for level in grid_levels:
        cfg_level = with_cells(replace(cfg, lambdas=tuple(lambdas)),
                               (level,) * cfg.dimension)
        trace = run_ensemble(cfg_level, n_replicas)
        for lam in lambdas:
            key = f"w{lam:g}"
            value = float(np.trapezoid(trace.means[key], trace.times))
            rows.append(RegularityRow(lam=float(lam), level=int(level),
                                      value=value))
    return rows


def refinement_ratios(rows, lam: float):
    """Successive value ratios for one lambda, in grid-level order."""
    vals = [r.value for r in rows if r.lam == lam]
    return [vals[i + 1] / vals[i] for i in range(len(vals) - 1)]


def export_ensemble_csv(trace: EnsembleTrace, norm: str, file,
                        header_lines=()) -> None:
    if not hasattr(file, "write"):
        with open(file, "w") as fh:
            export_ensemble_csv(trace, norm, fh, header_lines)
        return
    for line in header_lines:
        file.write(f"# {line}\n")
    file.write("t,mean,stderr,n\n")
    for i, t in enumerate(trace.times):
        file.write(f"{t:.17g},{trace.means[norm][i]:.17g},"
                   f"{trace.stderrs[norm][i]:.17g},{trace.n_replicas}\n")


def export_fit_csv(fit: RateFit, file) -> None:
    if not hasattr(file, "write"):
        with open(file, "w") as fh:
            export_fit_csv(fit, fh)
        return
    file.write("tmin,tmax,slope,slope_lo,slope_hi,r2\n")
    file.write(f"{fit.window[0]:.17g},{fit.window[1]:.17g},"
               f"{fit.slope:.17g},{fit.slope_ci[0]:.17g},"
               f"{fit.slope_ci[1]:.17g},{fit.r_squared:.17g}\n")
