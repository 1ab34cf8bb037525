"""Piecewise-linear approximations of N-component Brownian driving paths.

A path is stored as breakpoints ``times`` and per-component ``values`` with
``values[0] == 0``.  Between breakpoints the path is linear.  Refinement
inserts Brownian-bridge midpoints; the coarse breakpoints and values are
carried over untouched, so a refined path agrees with its parent exactly.

All breakpoint times and values are quantized to multiples of 2**-40.  At
that resolution sums and differences of path data are exact in IEEE double
(the numbers behave like fixed-point integers), which makes increment
telescoping and bridge refinement bitwise-reproducible.  The quantization
error (~9e-13) is far below every statistical tolerance used downstream.

Randomness is drawn from Philox streams keyed by (seed, level), one stream
per refinement level consumed in interval order, so refining a path never
perturbs the randomness of coarser levels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_QUANTUM = 2.0 ** -40


def _quantize(x):
    return np.round(np.asarray(x, dtype=float) / _QUANTUM) * _QUANTUM


def _level_rng(seed: int, level: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(level)])
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class DrivingPath:
    """Piecewise-linear path with strictly increasing breakpoints.

    times:  shape (K+1,), times[0] == 0, strictly increasing.
    values: shape (K+1, N), values[0] == 0 componentwise.
    seed:   64-bit reproducibility token.
    level:  dyadic refinement depth (0 for a freshly sampled path).
    """

    times: np.ndarray
    values: np.ndarray
    seed: int
    level: int = 0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or v.ndim != 2 or v.shape[0] != t.shape[0]:
            raise ValueError("times must be (K+1,), values (K+1, N)")
        if t[0] != 0.0 or np.any(v[0] != 0.0):
            raise ValueError("path must start at t=0 with value 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def n_components(self) -> int:
        return self.values.shape[1]

    @property
    def n_segments(self) -> int:
        return len(self.times) - 1

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def eval(self, t):
        """Linear interpolation, componentwise.  t may be scalar or array."""
        t = np.asarray(t, dtype=float)
        out = np.empty(t.shape + (self.n_components,))
        for j in range(self.n_components):
            out[..., j] = np.interp(t, self.times, self.values[:, j])
        return out


def sample_brownian(seed: int, n_components: int, horizon: float,
                    segments: int) -> DrivingPath:
    """Sample a piecewise-linear Brownian path on a uniform breakpoint grid.

    Increments over the ``segments`` intervals are independent centered
    Gaussians with variance equal to the interval length.  The same seed
    yields a bitwise-identical path.
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    if segments < 1:
        raise ValueError("segments must be >= 1")
    if n_components < 1:
        raise ValueError("need at least one component")
    times = _quantize(np.linspace(0.0, horizon, segments + 1))
    dt = np.diff(times)
    rng = _level_rng(seed, 0)
    z = rng.standard_normal((segments, n_components))
    inc = _quantize(np.sqrt(dt)[:, None] * z)
    values = np.vstack([np.zeros(n_components), np.cumsum(inc, axis=0)])
    return DrivingPath(times=times, values=values, seed=int(seed), level=0)


def identity_path(horizon: float, n_components: int = 1) -> DrivingPath:
    """The deterministic path beta(t) = (t, ..., t) on [0, horizon]."""
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    times = _quantize(np.array([0.0, horizon]))
    values = np.repeat(times[:, None], n_components, axis=1)
    return DrivingPath(times=times, values=values, seed=0, level=0)


def refine(path: DrivingPath) -> DrivingPath:
    """Insert Brownian-bridge midpoints between every pair of breakpoints.

    Parent breakpoints and values are preserved exactly; each midpoint is
    drawn from the conditional bridge law, N(mean of endpoints, dt/4), with
    randomness keyed by (seed, level+1) and consumed in interval order.
    """
    t, v = path.times, path.values
    k, n = path.n_segments, path.n_components
    rng = _level_rng(path.seed, path.level + 1)
    z = rng.standard_normal((k, n))
    tmid = _quantize(0.5 * (t[:-1] + t[1:]))
    dt = t[1:] - t[:-1]
    vmid = _quantize(0.5 * (v[:-1] + v[1:]) + 0.5 * np.sqrt(dt)[:, None] * z)
    times = np.empty(2 * k + 1)
    values = np.empty((2 * k + 1, n))
    times[0::2], times[1::2] = t, tmid
    values[0::2], values[1::2] = v, vmid
    return DrivingPath(times=times, values=values, seed=path.seed,
                       level=path.level + 1)


def segments(path: DrivingPath):
    """Consecutive increments (dt, dbeta) of the path.

    Returns arrays of shape (K,) and (K, N); partial sums of dbeta reproduce
    the breakpoint values exactly (all path data sit on the 2**-40 grid).
    """
    return np.diff(path.times), np.diff(path.values, axis=0)


def dump_path_csv(path: DrivingPath, file) -> None:
    """Write the path as CSV columns t, beta_1, ..., beta_N."""
    header = "t," + ",".join(f"beta_{j + 1}" for j in range(path.n_components))
    rows = np.column_stack([path.times, path.values])
    _write = file.write if hasattr(file, "write") else None
    if _write is None:
        with open(file, "w") as fh:
            dump_path_csv(path, fh)
        return
    _write(header + "\n")
    for row in rows:
        _write(",".join(f"{x:.17g}" for x in row) + "\n")


def load_path_csv(file, seed: int = 0, level: int = 0) -> DrivingPath:
    """Read a path written by :func:`dump_path_csv`."""
    if not hasattr(file, "read"):
        with open(file) as fh:
            return load_path_csv(fh, seed=seed, level=level)
    header = file.readline().strip().split(",")
    if header[0] != "t":
        raise ValueError("expected header row starting with 't'")
    data = np.loadtxt(file, delimiter=",", ndmin=2)
    return DrivingPath(times=data[:, 0], values=data[:, 1:], seed=seed,
                       level=level)
