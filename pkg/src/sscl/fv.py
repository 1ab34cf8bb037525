"""Monotone finite-volume kernels on the periodic unit torus.

1D sweeps use Godunov's flux (Engquist-Osher behind a switch); 2D evolves
by Strang dimensional splitting.  A sweep advances a conservation law
du/ds + d/dx A(u) = 0 for a given pseudo-time; decreasing path segments are
realized by sweeping with the flux -A, which is the forward conservation
law the rescaled equation becomes on a down segment.

Sub-steps satisfy ds * max|A'| / dx <= cfl, with max|A'| taken over the
field range at sweep entry (valid throughout, by the max principle).  The
hot loop is a numba kernel; a pure-numpy path handles the cell-resolved
dissipation bookkeeping and serves as fallback (set SSCL_NO_NUMBA=1).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure
from .flux import FluxSpec, PolyFlux

try:
    if os.environ.get("SSCL_NO_NUMBA"):
        raise ImportError
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via SSCL_NO_NUMBA
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(f):
            return f
        return deco


@dataclass
class Field:
    """Cell-average grid function on the unit torus, dim 1 or 2."""

    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data, dtype=float)
        if d.ndim not in (1, 2):
            raise ValueError("Field must be 1D or 2D")
        if not np.all(np.isfinite(d)):
            raise ValueError("Field entries must be finite")
        self.data = d

    @property
    def dim(self) -> int:
        return self.data.ndim

    @property
    def cells(self) -> tuple:
        return self.data.shape

    @property
    def cell_volume(self) -> float:
        return float(np.prod([1.0 / m for m in self.data.shape]))

    def mean(self) -> float:
        return float(np.mean(self.data))

    def copy(self) -> "Field":
        return Field(self.data.copy())


def cell_centers(cells: int) -> np.ndarray:
    """Cell-center coordinates (i + 1/2) / M along one axis."""
    return (np.arange(cells) + 0.5) / cells


@dataclass
class DissipationSample:
    """Kruzkov entropy decrease of one sweep, resolved in xi bins.

    ``rho`` is the x-integrated dissipation density sampled at the bin
    centers; ``cell_rho`` (optional) disintegrates it over cells using the
    numerical entropy flux, so each entry is nonnegative and the cell sum
    reproduces ``rho``.
    """

    xi_centers: np.ndarray
    rho: np.ndarray
    cell_rho: np.ndarray | None = None


def kruzkov_rho(before: np.ndarray, after: np.ndarray,
                xi_centers: np.ndarray, cell_volume: float) -> np.ndarray:
    """x-integrated dissipation density at bin centers for one step.

    rho(c) = (int |u_before - c| dx - int |u_after - c| dx) / 2, which is
    nonnegative for monotone-scheme steps and exactly zero outside the
    joint range of the two fields.
    """
    b = before.reshape(-1)[:, None]
    a = after.reshape(-1)[:, None]
    c = np.asarray(xi_centers)[None, :]
    return 0.5 * cell_volume * (np.sum(np.abs(b - c), axis=0)
                                - np.sum(np.abs(a - c), axis=0))


# ---------------------------------------------------------------------------
# interval extrema and numerical fluxes (vectorized numpy forms)

def interval_min_max(comp: PolyFlux, lo, hi):
    """Min and max of A over [lo, hi], elementwise; exact for polynomials."""
    alo, ahi = comp.A(lo), comp.A(hi)
    mn, mx = np.minimum(alo, ahi), np.maximum(alo, ahi)
    for c in comp.crit_points_A():
        inside = (lo < c) & (c < hi)
        if np.any(inside):
            ac = float(comp.A(c))
            mn = np.where(inside, np.minimum(mn, ac), mn)
            mx = np.where(inside, np.maximum(mx, ac), mx)
    return mn, mx


def godunov_flux(comp: PolyFlux, u_left, u_right):
    """Godunov flux: min of A on [uL,uR] if uL <= uR, else max on [uR,uL]."""
    u_left = np.asarray(u_left, dtype=float)
    u_right = np.asarray(u_right, dtype=float)
    lo, hi = np.minimum(u_left, u_right), np.maximum(u_left, u_right)
    mn, mx = interval_min_max(comp, lo, hi)
    return np.where(u_left <= u_right, mn, mx)


def _signed_integral(comp: PolyFlux, u, positive: bool):
    # int_0^u max(a, 0) ds (or min), split at the sign changes of a.
    roots = comp.crit_points_A()
    edges = np.concatenate([[-np.inf], roots, [np.inf]])
    total = np.zeros_like(np.asarray(u, dtype=float))
    for k in range(len(edges) - 1):
        lo, hi = edges[k], edges[k + 1]
        probe = (lo + hi) / 2.0
        if not np.isfinite(probe):
            probe = (lo + 1.0) if np.isfinite(lo) else (
                (hi - 1.0) if np.isfinite(hi) else 0.0)
        sgn = comp.a(probe)
        if (positive and sgn > 0) or (not positive and sgn < 0):
            a_cl = np.clip(u, lo, hi)
            z_cl = min(max(0.0, lo), hi)
            total = total + comp.A(a_cl) - comp.A(z_cl)
    return total


def engquist_osher_flux(comp: PolyFlux, u_left, u_right):
    """Engquist-Osher flux A(0) + int_0^uL a^+ + int_0^uR a^-."""
    return (comp.A(0.0) + _signed_integral(comp, u_left, True)
            + _signed_integral(comp, u_right, False))


_NUMERICAL_FLUXES = {"godunov": godunov_flux, "engquist_osher": engquist_osher_flux}


# ---------------------------------------------------------------------------
# numba kernel (godunov only; rows share the sweep axis as last dimension)

@njit(cache=True)
def _polyval(c, x):
    y = 0.0
    for k in range(len(c) - 1, -1, -1):
        y = y * x + c[k]
    return y


@njit(cache=True)
def _sweep_rows_kernel(u, acoef, dacoef, crit_a, crit_da, dx, pseudo, cfl):
    rows, m = u.shape
    lo = u[0, 0]
    hi = u[0, 0]
    for r in range(rows):
        for j in range(m):
            v = u[r, j]
            if v < lo:
                lo = v
            if v > hi:
                hi = v
    smax = abs(_polyval(dacoef, lo))
    s = abs(_polyval(dacoef, hi))
    if s > smax:
        smax = s
    for k in range(len(crit_da)):
        c = crit_da[k]
        if lo < c < hi:
            s = abs(_polyval(dacoef, c))
            if s > smax:
                smax = s
    if smax <= 0.0 or pseudo <= 0.0:
        return 0
    nsub = int(np.ceil(pseudo * smax / (cfl * dx)))
    if nsub < 1:
        nsub = 1
    lam = (pseudo / nsub) / dx
    flx = np.empty(m)
    for _ in range(nsub):
        for r in range(rows):
            row = u[r]
            for j in range(m):
                ul = row[j]
                ur = row[j + 1] if j + 1 < m else row[0]
                al = _polyval(acoef, ul)
                ar = _polyval(acoef, ur)
                if ul <= ur:
                    f = al if al < ar else ar
                    for k in range(len(crit_a)):
                        c = crit_a[k]
                        if ul < c < ur:
                            ac = _polyval(acoef, c)
                            if ac < f:
                                f = ac
                else:
                    f = al if al > ar else ar
                    for k in range(len(crit_a)):
                        c = crit_a[k]
                        if ur < c < ul:
                            ac = _polyval(acoef, c)
                            if ac > f:
                                f = ac
                flx[j] = f
            for j in range(m):
                jm = m - 1 if j == 0 else j - 1
                row[j] = row[j] - lam * (flx[j] - flx[jm])
    return nsub


def _numpy_sweep_rows(u, comp, dx, pseudo, cfl, flux_fn, xi_centers=None,
                      cell_volume=None, collect_cells=False):
    """Reference sweep on (rows, m) data; optional cell-resolved ledger.

    Returns (u_new, cell_rho or None); cell_rho has shape (rows, m, B) and
    uses the Kruzkov numerical entropy flux so entries are nonnegative.
    """
    rows, m = u.shape
    lo, hi = float(u.min()), float(u.max())
    smax = comp.max_abs_a(lo, hi)
    if smax <= 0.0 or pseudo <= 0.0:
        return u, (np.zeros((rows, m, len(xi_centers)))
                   if collect_cells else None)
    nsub = max(1, int(np.ceil(pseudo * smax / (cfl * dx))))
    lam = (pseudo / nsub) / dx
    cell = (np.zeros((rows, m, len(xi_centers))) if collect_cells else None)
    for _ in range(nsub):
        un = np.roll(u, -1, axis=1)
        flx = flux_fn(comp, u, un)
        div = flx - np.roll(flx, 1, axis=1)
        unew = u - lam * div
        if collect_cells:
            c = np.asarray(xi_centers)[None, None, :]
            uc, unc = u[..., None], un[..., None]
            gplus = flux_fn(comp, np.maximum(uc, c), np.maximum(unc, c))
            gminus = flux_fn(comp, np.minimum(uc, c), np.minimum(unc, c))
            g = gplus - gminus
            gdiv = g - np.roll(g, 1, axis=1)
            cell += 0.5 * cell_volume * (
                np.abs(uc - c) - np.abs(unew[..., None] - c) - lam * gdiv)
        u = unew
    return u, cell


def sweep_1d(field: Field, axis: int, comp: PolyFlux, sign: int,
             pseudo_time: float, cfl: float = 0.45,
             numerical_flux: str = "godunov",
             xi_centers=None, cell_resolved: bool = False):
    """One conservative 1D sweep along ``axis`` for a given pseudo-time.

    sign=-1 sweeps with the flux -A (down path segment); the entropy
    condition is imposed forward in pseudo-time either way.  Returns the
    updated field and, when xi_centers is given, a DissipationSample.
    """
    if pseudo_time < 0:
        raise ValueError("pseudo_time must be nonnegative")
    if axis not in range(field.dim):
        raise ValueError("axis out of range for field")
    if not np.all(np.isfinite(field.data)):
        raise NumericalFailure("non-finite field entering sweep")
    if numerical_flux not in _NUMERICAL_FLUXES:
        raise ValueError(f"unknown numerical flux '{numerical_flux}'")

    data = field.data
    if field.dim == 1:
        work = data[None, :].copy()
    elif axis == 1:
        work = data.copy()
    else:
        work = np.ascontiguousarray(data.T)
    m = work.shape[1]
    dx = 1.0 / m
    before = work.copy() if xi_centers is not None else None

    signed = PolyFlux(tuple(sign * c for c in comp.coeffs))
    use_kernel = (_HAVE_NUMBA and not cell_resolved
                  and numerical_flux == "godunov")
    cell = None
    if use_kernel:
        _sweep_rows_kernel(work,
                           np.asarray(signed.coeffs),
                           np.asarray(signed._da, dtype=float),
                           signed.crit_points_A(), signed.crit_points_a(),
                           dx, float(pseudo_time), float(cfl))
    else:
        work, cell = _numpy_sweep_rows(
            work, signed, dx, float(pseudo_time), float(cfl),
            _NUMERICAL_FLUXES[numerical_flux],
            xi_centers=xi_centers, cell_volume=field.cell_volume,
            collect_cells=cell_resolved and xi_centers is not None)

    sample = None
    if xi_centers is not None:
        rho = kruzkov_rho(before, work, xi_centers, field.cell_volume)
        if cell is not None:
            if field.dim == 1:
                cell = cell[0]
            elif axis == 0:
                cell = np.transpose(cell, (1, 0, 2))
        sample = DissipationSample(np.asarray(xi_centers), rho, cell)

    if field.dim == 1:
        out = Field(work[0])
    elif axis == 1:
        out = Field(work)
    else:
        out = Field(np.ascontiguousarray(work.T))
    if not np.all(np.isfinite(out.data)):
        raise NumericalFailure("sweep produced non-finite values")
    return out, sample


def strang_split_2d(field: Field, flux: FluxSpec, dbeta, cfl: float = 0.45,
                    numerical_flux: str = "godunov",
                    xi_centers=None, cell_resolved: bool = False):
    """Strang splitting for one 2D path segment with increments dbeta.

    Half sweep along axis 0, full sweep along axis 1, half sweep along
    axis 0; the mean is conserved to roundoff by the conservative form.
    """
    if field.dim != 2:
        raise ValueError("strang_split_2d requires a 2D field")
    if flux.n_components != 2:
        raise ValueError("flux must have two components")
    d1, d2 = float(dbeta[0]), float(dbeta[1])
    s1 = 1 if d1 >= 0 else -1
    s2 = 1 if d2 >= 0 else -1
    samples = []
    out = field
    for axis, comp, sgn, tau in ((0, flux.components[0], s1, abs(d1) / 2),
                                 (1, flux.components[1], s2, abs(d2)),
                                 (0, flux.components[0], s1, abs(d1) / 2)):
        out, smp = sweep_1d(out, axis, comp, sgn, tau, cfl=cfl,
                            numerical_flux=numerical_flux,
                            xi_centers=xi_centers,
                            cell_resolved=cell_resolved)
        if smp is not None:
            samples.append(smp)
    sample = None
    if samples:
        rho = sum(s.rho for s in samples)
        cell = None
        if all(s.cell_rho is not None for s in samples):
            cell = sum(s.cell_rho for s in samples)
        sample = DissipationSample(samples[0].xi_centers, rho, cell)
    return out, sample


def exact_riemann_burgers(u_left: float, u_right: float, x, t: float):
    """Entropy solution of the Riemann problem for A(u) = u**2.

    Shock with Rankine-Hugoniot speed uL + uR when uL > uR, else the
    self-similar fan u = x / (2 t), clipped to [uL, uR].
    """
    if not t > 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    if u_left > u_right:
        speed = u_left + u_right
        return np.where(x < speed * t, u_left, u_right)
    if u_left < u_right:
        return np.clip(x / (2.0 * t), u_left, u_right)
    return np.full_like(x, u_left)


def exact_riemann_burgers_periodic(u_left: float, u_right: float, x,
                                   t: float):
    """Exact solution of riemann(uL, uR) data periodicized on the torus.

    Initial data: uL on [0, 1/2), uR on [1/2, 1); a wave sits at x = 1/2
    and the complementary wave at the wrap point x = 0.  Valid while both
    waves stay within 1/4 of their centers (t * 2 max|u| < 1/4).
    """
    span = 2.0 * max(abs(u_left), abs(u_right)) * t
    if span >= 0.25:
        raise ValueError("waves interact; exact two-wave form invalid")
    x = np.mod(np.asarray(x, dtype=float), 1.0)
    mid = exact_riemann_burgers(u_left, u_right, x - 0.5, t)
    xw = np.where(x < 0.5, x, x - 1.0)
    wrap = exact_riemann_burgers(u_right, u_left, xw, t)
    return np.where(np.abs(x - 0.5) <= 0.25, mid, wrap)


def dump_field_csv(field: Field, file) -> None:
    """Write a field as flat CSV ``i[,j],u`` with the grid shape up front."""
    if not hasattr(file, "write"):
        with open(file, "w") as fh:
            dump_field_csv(field, fh)
        return
    file.write("# shape: " + "x".join(str(m) for m in field.cells) + "\n")
    if field.dim == 1:
        file.write("i,u\n")
        for i, v in enumerate(field.data):
            file.write(f"{i},{v:.17g}\n")
    else:
        file.write("i,j,u\n")
        for i in range(field.cells[0]):
            for j in range(field.cells[1]):
                file.write(f"{i},{j},{field.data[i, j]:.17g}\n")


def load_field_csv(file) -> Field:
    """Read a field written by :func:`dump_field_csv`."""
    if not hasattr(file, "read"):
        with open(file) as fh:
            return load_field_csv(fh)
    shape_line = file.readline().strip()
    if not shape_line.startswith("# shape:"):
        raise ValueError("missing shape header")
    shape = tuple(int(s) for s in shape_line.split(":")[1].strip().split("x"))
    file.readline()  # column header
    raw = np.loadtxt(file, delimiter=",", ndmin=2)
    data = np.zeros(shape)
    if len(shape) == 1:
        data[raw[:, 0].astype(int)] = raw[:, 1]
    else:
        data[raw[:, 0].astype(int), raw[:, 1].astype(int)] = raw[:, 2]
    return Field(data)
