"""Polynomial flux families and genuine-nonlinearity exponent estimation.

A flux has N scalar components ``A_j`` (polynomials in the state variable),
derivative ``a_j = A_j'`` and polynomial growth of the second derivative,
|A''| <= C (1 + |xi|^m).  Two non-degeneracy conditions are measured:

* stochastic:    |{xi : |a(xi) sigma - z| <= eps}| <= C eps^theta, where
  a(xi) sigma is the componentwise product and z runs over R^N;
* deterministic: |{xi : a(xi) . sigma - z| <= eps}| <= C eps^theta, with the
  inner product and a scalar shift z.

The exponent theta is estimated by brute-force level-set measurements on a
uniform xi grid, a sampled supremum over (sigma, z), and a log-log fit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.stats import qmc


def _real_roots(coeffs, tol=1e-9):
    """Real roots of a polynomial given by ascending coefficients."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    if len(c) <= 1:
        return np.empty(0)
    r = npoly.polyroots(c)
    return np.sort(np.unique(r[np.abs(r.imag) < tol].real))


@dataclass(frozen=True)
class PolyFlux:
    """One scalar flux component A(xi) as a polynomial (ascending coeffs)."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(float(x) for x in self.coeffs)
        if len(c) == 0:
            c = (0.0,)
        object.__setattr__(self, "coeffs", c)

    def A(self, xi):
        return npoly.polyval(np.asarray(xi, dtype=float), self.coeffs)

    def a(self, xi):
        return npoly.polyval(np.asarray(xi, dtype=float), self._da)

    def a_prime(self, xi):
        return npoly.polyval(np.asarray(xi, dtype=float), self._dda)

    @property
    def _da(self):
        return npoly.polyder(self.coeffs)

    @property
    def _dda(self):
        return npoly.polyder(self.coeffs, 2)

    def crit_points_A(self):
        """Roots of a = A'; interior extrema of A live here."""
        return _real_roots(self._da)

    def crit_points_a(self):
        """Roots of a' = A''; interior extrema of a live here."""
        return _real_roots(self._dda)

    def max_abs_a(self, lo: float, hi: float) -> float:
        """max |a| over [lo, hi], exact for polynomials."""
        cand = [abs(self.a(lo)), abs(self.a(hi))]
        for c in self.crit_points_a():
            if lo < c < hi:
                cand.append(abs(self.a(c)))
        return float(max(cand))


@dataclass(frozen=True)
class FluxSpec:
    """N-component flux with declared growth bound and claimed exponent."""

    components: tuple
    growth_c: float
    growth_m: int
    theta_claimed: float | None = None
    name: str = "custom"
    params: tuple = field(default_factory=tuple)

    @property
    def n_components(self) -> int:
        return len(self.components)

    def a_values(self, xi):
        """Stack a_j(xi) into shape (N, len(xi))."""
        xi = np.asarray(xi, dtype=float)
        return np.stack([c.a(xi) for c in self.components])

    def max_abs_a(self, lo: float, hi: float) -> float:
        return max(c.max_abs_a(lo, hi) for c in self.components)


def _growth_from_coeffs(components):
    # |A''(xi)| <= sum |c_k| |xi|^k <= (sum |c_k|) (1 + |xi|^deg)
    cmax, mdeg = 0.0, 0
    for comp in components:
        dd = np.asarray(comp._dda, dtype=float)
        dd = np.trim_zeros(dd, "b")
        if len(dd) == 0:
            dd = np.array([0.0])
        cmax = max(cmax, float(np.sum(np.abs(dd))))
        mdeg = max(mdeg, len(dd) - 1)
    return max(cmax, 1e-300), mdeg


def power_law(l: int) -> FluxSpec:
    """1D flux A(xi) = xi^(l+1)/(l+1), so a(xi) = xi^l and theta = 1/l."""
    if l < 1:
        raise ValueError("power-law order must be >= 1")
    coeffs = [0.0] * (l + 1) + [1.0 / (l + 1)]
    comp = PolyFlux(tuple(coeffs))
    c, m = _growth_from_coeffs([comp])
    return FluxSpec((comp,), c, m, theta_claimed=1.0 / l,
                    name="power_law", params=(l,))


def burgers() -> FluxSpec:
    """1D Burgers flux A(xi) = xi^2 (a = 2 xi, theta = 1)."""
    comp = PolyFlux((0.0, 0.0, 1.0))
    return FluxSpec((comp,), 2.0, 0, theta_claimed=1.0,
                    name="burgers", params=())


def diagonal_power(l: int) -> FluxSpec:
    """2D flux with equal components xi^(l+1)/(l+1) in both directions.

    The deterministic condition fails for this flux (the diagonal direction
    annihilates a . sigma) while the stochastic one holds with theta = 1/l.
    """
    if l < 1:
        raise ValueError("power-law order must be >= 1")
    coeffs = tuple([0.0] * (l + 1) + [1.0 / (l + 1)])
    comp = PolyFlux(coeffs)
    c, m = _growth_from_coeffs([comp, comp])
    return FluxSpec((comp, comp), c, m, theta_claimed=1.0 / l,
                    name="diagonal_power", params=(l,))


def custom_poly(*coeffs: float) -> FluxSpec:
    """1D flux from ascending polynomial coefficients of A."""
    comp = PolyFlux(tuple(coeffs))
    c, m = _growth_from_coeffs([comp])
    return FluxSpec((comp,), c, m, theta_claimed=None,
                    name="custom_poly", params=tuple(float(c) for c in coeffs))


_FAMILIES = {
    "power_law": power_law,
    "burgers": burgers,
    "diagonal_power": diagonal_power,
    "custom_poly": custom_poly,
}


def make_flux(name: str, params=()) -> FluxSpec:
    """Build a flux family by name; integer parameters are coerced."""
    if name not in _FAMILIES:
        raise ValueError(f"unknown flux family '{name}'")
    if name in ("power_law", "diagonal_power"):
        return _FAMILIES[name](int(params[0]))
    if name == "burgers":
        return _FAMILIES[name]()
    return _FAMILIES[name](*params)


@dataclass
class NonlinearityReport:
    """Result of a genuine-nonlinearity exponent fit."""

    theta_hat: float
    worst_direction: np.ndarray
    worst_shift: np.ndarray
    fit_residual: float
    degenerate: bool
    eps_grid: np.ndarray = None
    measures: np.ndarray = None


def _check_sigma(flux, sigma):
    sigma = np.asarray(sigma, dtype=float).reshape(-1)
    if sigma.shape[0] != flux.n_components:
        raise ValueError("sigma dimension mismatch")
    if abs(np.linalg.norm(sigma) - 1.0) > 1e-12:
        raise ValueError("sigma must be a unit vector")
    return sigma


def _xi_midpoints(xi_range, xi_samples):
    lo, hi = float(xi_range[0]), float(xi_range[1])
    if not hi > lo:
        raise ValueError("xi_range must be a nonempty interval")
    h = (hi - lo) / xi_samples
    return lo + (np.arange(xi_samples) + 0.5) * h, h


def measure_level_set_stochastic(flux: FluxSpec, sigma, z, eps: float,
                                 xi_range, xi_samples: int = 4096) -> float:
    """Lebesgue measure of {xi : |a(xi) sigma - z| <= eps} by grid counting.

    The product a(xi) sigma is componentwise and the norm Euclidean.  The
    count is exact up to one grid cell per boundary crossing.
    """
    sigma = _check_sigma(flux, sigma)
    if not eps > 0:
        raise ValueError("eps must be positive")
    if xi_samples < 1000:
        raise ValueError("xi_samples must be >= 1000")
    z = np.asarray(z, dtype=float).reshape(-1)
    xi, h = _xi_midpoints(xi_range, xi_samples)
    vals = flux.a_values(xi)  # (N, M)
    g2 = np.sum((vals * sigma[:, None] - z[:, None]) ** 2, axis=0)
    return float(np.count_nonzero(g2 <= eps * eps) * h)


def measure_level_set_deterministic(flux: FluxSpec, sigma, z_scalar: float,
                                    eps: float, xi_range,
                                    xi_samples: int = 4096) -> float:
    """Measure of {xi : |a(xi) . sigma - z| <= eps} (inner product, scalar z)."""
    sigma = _check_sigma(flux, sigma)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if xi_samples < 1000:
        raise ValueError("xi_samples must be >= 1000")
    xi, h = _xi_midpoints(xi_range, xi_samples)
    vals = flux.a_values(xi)
    g = np.abs(sigma @ vals - float(z_scalar))
    return float(np.count_nonzero(g <= eps) * h)


def _directions(flux, n_samples, rng_seed=1234):
    n = flux.n_components
    if n == 1:
        return np.array([[1.0], [-1.0]])
    # Sobol angles plus the axis and diagonal candidates where the known
    # degeneracies of product fluxes live.
    eng = qmc.Sobol(d=1, scramble=False, seed=rng_seed)
    ang = 2.0 * np.pi * eng.random(int(n_samples)).ravel()
    dirs = np.column_stack([np.cos(ang), np.sin(ang)])
    s = 1.0 / np.sqrt(2.0)
    extra = np.array([[1, 0], [0, 1], [-1, 0], [0, -1],
                      [s, s], [s, -s], [-s, s], [-s, -s]], dtype=float)
    return np.vstack([extra, dirs])


def _shift_candidates(flux, xi_range, n_samples, stochastic, rng_seed=5678):
    xi_probe = np.linspace(xi_range[0], xi_range[1], 257)
    vals = flux.a_values(xi_probe)
    zmax = float(np.max(np.abs(vals))) + 1.0
    n = flux.n_components
    d = n if stochastic else 1
    eng = qmc.Sobol(d=d, scramble=False, seed=rng_seed)
    pts = qmc.scale(eng.random(int(n_samples)), [-zmax] * d, [zmax] * d)
    # Level sets fatten at critical values of a; include them and zero.
    crit = [0.5 * (xi_range[0] + xi_range[1])]
    for comp in flux.components:
        crit.extend(c for c in comp.crit_points_a()
                    if xi_range[0] <= c <= xi_range[1])
    crit = np.asarray(crit, dtype=float)
    return pts, crit, zmax


def estimate_theta(flux: FluxSpec, condition: str, xi_range,
                   eps_grid, direction_samples: int = 32,
                   shift_samples: int = 32,
                   xi_samples: int = 4096) -> NonlinearityReport:
    """Fit the nonlinearity exponent from sup-level-set measures.

    For each eps the level-set measure is maximized over sampled directions
    and shifts, then log(measure) is regressed on log(eps).  An instance
    whose measure saturates 90% of the xi range is flagged degenerate and
    not fitted.
    """
    if condition not in ("stochastic", "deterministic"):
        raise ValueError("condition must be 'stochastic' or 'deterministic'")
    eps_grid = np.asarray(eps_grid, dtype=float)
    if eps_grid.size < 3:
        raise ValueError("need at least 3 eps values")
    if np.any(np.diff(eps_grid) >= 0) or np.any(eps_grid <= 0):
        raise ValueError("eps_grid must be decreasing and positive")
    if eps_grid[0] / eps_grid[-1] < 100.0 * (1.0 - 1e-9):
        raise ValueError("eps_grid must span at least two decades")
    if direction_samples < 32 or shift_samples < 32:
        raise ValueError("need at least 32 direction and shift samples")

    stochastic = condition == "stochastic"
    measure = (measure_level_set_stochastic if stochastic
               else measure_level_set_deterministic)
    dirs = _directions(flux, direction_samples)
    zpts, crit, _ = _shift_candidates(flux, xi_range, shift_samples,
                                      stochastic)
    range_len = float(xi_range[1] - xi_range[0])

    sup = np.zeros(eps_grid.size)
    worst = [(dirs[0], np.zeros(flux.n_components if stochastic else 1))] \
        * eps_grid.size
    for k, eps in enumerate(eps_grid):
        best = -1.0
        for sigma in dirs:
            shifts = [np.zeros(zpts.shape[1])] + list(zpts)
            if stochastic:
                shifts += [flux.a_values(np.array([c]))[:, 0] * sigma
                           for c in crit]
            else:
                shifts = [z[0] for z in shifts]
                shifts += [float(sigma @ flux.a_values(np.array([c]))[:, 0])
                           for c in crit]
            for z in shifts:
                m = measure(flux, sigma, z, eps, xi_range, xi_samples)
                if m > best:
                    best = m
                    worst[k] = (sigma, np.atleast_1d(z))
        sup[k] = best

    degenerate = bool(np.any(sup >= 0.9 * range_len))
    if degenerate or np.any(sup <= 0):
        report = NonlinearityReport(float("nan"), worst[-1][0], worst[-1][1],
                                    float("nan"), True, eps_grid, sup)
        return report
    slope, intercept = np.polyfit(np.log(eps_grid), np.log(sup), 1)
    resid = np.sqrt(np.mean(
        (np.log(sup) - (slope * np.log(eps_grid) + intercept)) ** 2))
    theta_hat = float(np.clip(slope, 0.0, 1.0))
    if not stochastic:
        limit = 1.0 / flux.n_components + 0.1
        if theta_hat > limit:
            warnings.warn(
                f"deterministic exponent {theta_hat:.3f} exceeds the smooth-"
                f"flux dimensional limit 1/N = {1.0 / flux.n_components:.3f}",
                stacklevel=2)
    return NonlinearityReport(theta_hat, worst[-1][0], worst[-1][1],
                              float(resid), False, eps_grid, sup)


def check_growth(flux: FluxSpec, xi_range, samples: int = 4096) -> bool:
    """True iff |A''| <= C (1 + |xi|^m) at all sampled points."""
    if samples < 1000:
        raise ValueError("samples must be >= 1000")
    xi = np.linspace(xi_range[0], xi_range[1], samples)
    bound = flux.growth_c * (1.0 + np.abs(xi) ** flux.growth_m)
    for comp in flux.components:
        if np.any(np.abs(comp.a_prime(xi)) > bound * (1.0 + 1e-12)):
            return False
    return True
