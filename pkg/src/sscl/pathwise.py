"""Drive the finite-volume kernels along a driving path.

Each linear path segment becomes one conservative sweep (1D) or one Strang
split step (2D) with pseudo-time |dbeta_i| and the sign of the increment.
Recording times are honored exactly by splitting segments at them (the
path is linear inside segments, so the split is exact); ledger buckets
coincide with the record intervals.

An optional zero-order source c*u is applied by Lie splitting: transport
first, then the exact exponential factor exp(c*dt).  The growth step's
Kruzkov increments are accumulated with their signs, which is what makes
the quasi-solution ledger carry a negative part.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure
from .flux import FluxSpec
from .fv import Field, strang_split_2d, sweep_1d
from .kinetic import KineticLedger, make_ledger
from .paths import DrivingPath, identity_path
from .spectral import w_lambda_1_norm

_TIME_TOL = 1e-9


@dataclass
class RecordOptions:
    """What to record during a solve.

    times: recording instants in (0, horizon); 0 and the horizon are
    always included.  snapshot_times selects instants whose full fields
    are kept.  xi_bins/ledger/cell_resolved control the dissipation
    ledger; lambdas lists the W^{lambda,1} norms traced per record time.
    """

    times: tuple = ()
    snapshot_times: tuple = ()
    xi_bins: int = 128
    ledger: bool = True
    cell_resolved: bool = False
    lambdas: tuple = ()
    cfl: float = 0.45
    numerical_flux: str = "godunov"


@dataclass
class SolveRecord:
    """Norm traces, optional snapshots and the dissipation ledger."""

    times: np.ndarray
    norms: dict
    snapshot_times: np.ndarray
    snapshots: list
    ledger: KineticLedger | None
    u_final: Field
    u0_mean: float
    p_high: int
    flux: FluxSpec
    path: DrivingPath
    seed: int | None = None
    config_hash: str = ""
    source_coeff: float = 0.0


def field_norms(f: Field, u0_mean: float, p_high: int, lambdas=()) -> dict:
    d = f.data
    out = {
        "l1_to_mean": float(np.mean(np.abs(d - u0_mean))),
        "l1": float(np.mean(np.abs(d))),
        "l2": float(np.sqrt(np.mean(d * d))),
        "l2pm": float(np.mean(np.abs(d) ** p_high) ** (1.0 / p_high)),
        "linf": float(np.max(np.abs(d))),
        "bv": _bv(f),
        "mean": float(np.mean(d)),
    }
    for lam in lambdas:
        out[f"w{lam:g}"] = w_lambda_1_norm(f, lam)
    return out


def _bv(f: Field) -> float:
    total = 0.0
    for axis in range(f.dim):
        diff = np.abs(np.roll(f.data, -1, axis=axis) - f.data)
        total += float(np.sum(diff)) * f.cell_volume * f.data.shape[axis]
    return total


def _record_grid(horizon: float, options: RecordOptions):
    times = np.asarray(sorted(set([0.0, float(horizon)])
                              | {float(t) for t in options.times}
                              | {float(t) for t in options.snapshot_times}))
    if times[0] < -_TIME_TOL or times[-1] > horizon * (1 + _TIME_TOL):
        raise ValueError("record times must lie within [0, horizon]")
    keep = np.concatenate([[True], np.diff(times) > _TIME_TOL])
    return times[keep]


def _match(t: float, grid: np.ndarray) -> bool:
    i = np.searchsorted(grid, t)
    for j in (i - 1, i):
        if 0 <= j < len(grid) and abs(grid[j] - t) <= _TIME_TOL * max(1.0, t):
            return True
    return False


def solve(u0: Field, flux: FluxSpec, path: DrivingPath,
          record: RecordOptions | None = None, seed: int | None = None,
          source_coeff: float = 0.0) -> SolveRecord:
    """Pathwise entropy solution of du + sum d/dx_i A_i(u) dbeta_i = 0.

    With source_coeff c != 0 the equation gains the right-hand side c*u
    (the quasi-solution construction); the growth factor per segment is
    exact, so the spatial mean evolves as mean(u0) * exp(c*t).
    """
    record = record or RecordOptions()
    if flux.n_components != u0.dim or path.n_components != u0.dim:
        raise ValueError("flux components, path components and field "
                         "dimension must agree")
    horizon = path.horizon
    rec_times = _record_grid(horizon, record)
    events = np.unique(np.concatenate([path.times, rec_times]))
    keep = np.concatenate([[True], np.diff(events) > _TIME_TOL])
    events = events[keep]

    ledger = None
    if record.ledger:
        lo, hi = float(u0.data.min()), float(u0.data.max())
        grow = np.exp(max(source_coeff, 0.0) * horizon)
        ledger = make_ledger((min(lo * grow, lo), max(hi * grow, hi)),
                             rec_times, xi_bins=record.xi_bins,
                             moment_orders=(0, flux.growth_m))
    xi_centers = ledger.xi_centers if ledger is not None else None

    p_high = 2 + flux.growth_m
    u0_mean = u0.mean()
    u = u0.copy()
    trace = {k: [v] for k, v in
             field_norms(u, u0_mean, p_high, record.lambdas).items()}
    snap_grid = np.asarray(sorted({float(t) for t in record.snapshot_times}))
    snap_times, snaps = [], []
    if len(snap_grid) and _match(0.0, snap_grid):
        snap_times.append(0.0)
        snaps.append(u.copy())
    rec_index = 1  # rec_times[0] == 0 already recorded

    beta_at_events = path.eval(events)
    comp0 = flux.components[0]
    t_prev = float(events[0])
    for k in range(1, len(events)):
        t_next = float(events[k])
        dt = t_next - t_prev
        dbeta = beta_at_events[k] - beta_at_events[k - 1]
        bucket = (ledger.bucket_index(0.5 * (t_prev + t_next))
                  if ledger is not None else 0)
        try:
            if u0.dim == 1:
                sgn = 1 if dbeta[0] >= 0 else -1
                u, sample = sweep_1d(
                    u, 0, comp0, sgn, abs(float(dbeta[0])), cfl=record.cfl,
                    numerical_flux=record.numerical_flux,
                    xi_centers=xi_centers,
                    cell_resolved=record.cell_resolved)
            else:
                u, sample = strang_split_2d(
                    u, flux, dbeta, cfl=record.cfl,
                    numerical_flux=record.numerical_flux,
                    xi_centers=xi_centers,
                    cell_resolved=record.cell_resolved)
        except NumericalFailure as exc:
            raise NumericalFailure(f"solve failed at t={t_next:g}",
                                   time=t_next, seed=seed) from exc
        if ledger is not None and sample is not None:
            ledger.add_sample(bucket, sample, signed=False)
        if source_coeff != 0.0:
            factor = float(np.exp(source_coeff * dt))
            before = u.copy()
            u = Field(u.data * factor)
            if ledger is not None:
                ledger.accumulate(before, u, bucket, signed=True)
        if rec_index < len(rec_times) and \
                abs(t_next - rec_times[rec_index]) <= _TIME_TOL * max(1.0, t_next):
            for key, val in field_norms(u, u0_mean, p_high,
                                        record.lambdas).items():
                trace[key].append(val)
            rec_index += 1
        if len(snap_grid) and _match(t_next, snap_grid) and \
                (not snap_times or t_next > snap_times[-1] + _TIME_TOL):
            snap_times.append(t_next)
            snaps.append(u.copy())
        t_prev = t_next

    norms = {k: np.asarray(v) for k, v in trace.items()}
    return SolveRecord(times=rec_times, norms=norms,
                       snapshot_times=np.asarray(snap_times),
                       snapshots=snaps, ledger=ledger, u_final=u,
                       u0_mean=u0_mean, p_high=p_high, flux=flux, path=path,
                       seed=seed, source_coeff=source_coeff)


def solve_deterministic(u0: Field, flux: FluxSpec, horizon: float,
                        record: RecordOptions | None = None,
                        seed: int | None = None) -> SolveRecord:
    """Entropy solution of the time-homogeneous law (identity path)."""
    path = identity_path(horizon, flux.n_components)
    return solve(u0, flux, path, record=record, seed=seed)


def solve_with_source(u0: Field, flux: FluxSpec, path: DrivingPath,
                      source_coeff: float,
                      record: RecordOptions | None = None,
                      seed: int | None = None) -> SolveRecord:
    """Quasi-solution approximant: transport plus the source c*u.

    The ledger keeps the entropy dissipation in its positive part and the
    signed growth-step increments separately, so its negative part tracks
    the source and the total variation stays available.
    """
    return solve(u0, flux, path, record=record, seed=seed,
                 source_coeff=float(source_coeff))


def export_record_csv(record: SolveRecord, file, header_lines=()) -> None:
    """Write the norm trace as CSV; header_lines become '#' comments."""
    if not hasattr(file, "write"):
        with open(file, "w") as fh:
            export_record_csv(record, fh, header_lines)
        return
    for line in header_lines:
        file.write(f"# {line}\n")
    keys = ["l1_to_mean", "l2", "l2pm", "linf", "bv", "mean"]
    keys += [k for k in record.norms if k.startswith("w")]
    file.write("t," + ",".join(keys) + "\n")
    for i, t in enumerate(record.times):
        row = [f"{t:.17g}"] + [f"{record.norms[k][i]:.17g}" for k in keys]
        file.write(",".join(row) + "\n")
