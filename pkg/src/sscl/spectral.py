"""Fourier-side analysis on the unit torus.

Fields live at cell centers x_j = (j + 1/2)/M; Fourier coefficients use
integer frequencies n (the 2*pi lives in the basis functions), so the
transport semigroup multiplies mode n by exp(-2*pi*i a(xi) dbeta . n) and
the regularizer B = (-Laplace)^alpha + Id acts as gamma*(|n|^(2 alpha)+1)
with the integer lattice norm.  The homogeneous norms zero out the n = 0
mode for every exponent, including lambda = 0.

The solution splits as u = u0 + u1 + Q against the regularized semigroup:
u0 transports the initial kinetic density, u1 integrates gamma*B against
the kinetic density along the flow, and Q integrates the xi-derivative of
the adjoint semigroup against the dissipation measure.  verify_split
evaluates all three from a solve record (with the ledger standing in for
the measure) and reports the per-mode defect.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flux import FluxSpec
from .fv import Field, cell_centers
from .kinetic import chi_bin_averages
from .paths import DrivingPath, sample_brownian, refine
from ._seeds import derive_seed


# ---------------------------------------------------------------------------
# transforms and norms

def _freqs(m: int) -> np.ndarray:
    return np.fft.fftfreq(m, d=1.0 / m)


def _center_phase(shape):
    """Per-axis phase factors moving samples from cell centers to nodes."""
    phases = []
    for m in shape:
        phases.append(np.exp(-1j * np.pi * _freqs(m) / m))
    return phases


def fft_coeffs(f: Field) -> np.ndarray:
    """Fourier coefficients u_hat(n) of a cell-centered field."""
    shape = f.data.shape
    coeffs = np.fft.fftn(f.data) / f.data.size
    for axis, ph in enumerate(_center_phase(shape)):
        sl = [None] * len(shape)
        sl[axis] = slice(None)
        coeffs = coeffs * ph[tuple(sl)]
    return coeffs


def coeffs_to_data(coeffs: np.ndarray) -> np.ndarray:
    """Invert :func:`fft_coeffs`, returning real cell-center samples."""
    shape = coeffs.shape
    for axis, ph in enumerate(_center_phase(shape)):
        sl = [None] * len(shape)
        sl[axis] = slice(None)
        coeffs = coeffs / ph[tuple(sl)]
    return np.real(np.fft.ifftn(coeffs * coeffs.size))


def lattice_abs(shape) -> np.ndarray:
    """|n| over the integer frequency lattice in fft layout."""
    grids = np.meshgrid(*[_freqs(m) for m in shape], indexing="ij")
    return np.sqrt(sum(g * g for g in grids))


def _homogeneous_multiplier(shape, lam: float) -> np.ndarray:
    nabs = lattice_abs(shape)
    return np.where(nabs > 0, nabs ** lam, 0.0)


def w_lambda_1_norm(f: Field, lam: float) -> float:
    """L1 norm of the inverse transform of |n|^lambda u_hat(n), n=0 dropped."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    coeffs = fft_coeffs(f) * _homogeneous_multiplier(f.data.shape, lam)
    return float(np.mean(np.abs(coeffs_to_data(coeffs))))


def h_lambda_norm(f: Field, lam: float) -> float:
    """Parseval form of the homogeneous H^lambda = W^{lambda,2} norm."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    coeffs = fft_coeffs(f) * _homogeneous_multiplier(f.data.shape, lam)
    return float(np.sqrt(np.sum(np.abs(coeffs) ** 2)))


@dataclass(frozen=True)
class RegularizerSpec:
    """Fractional regularizer B = (-Laplace)^alpha + Id scaled by gamma."""

    gamma: float
    alpha: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")

    def multiplier(self, nabs):
        return self.gamma * (np.asarray(nabs, dtype=float)
                             ** (2.0 * self.alpha) + 1.0)


@dataclass
class SpectralField:
    """Fourier coefficients in fft layout over the grid lattice."""

    coeffs: np.ndarray

    def to_field(self) -> Field:
        return Field(coeffs_to_data(self.coeffs))

    def coeff(self, mode) -> complex:
        idx = tuple(int(m) % s for m, s in
                    zip(np.atleast_1d(mode), self.coeffs.shape))
        return complex(self.coeffs[idx])

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))


# ---------------------------------------------------------------------------
# the split u = u0 + u1 + Q

def _mode_grids(shape):
    return np.meshgrid(*[_freqs(m) for m in shape], indexing="ij")


def _transport_phase(shape, flux: FluxSpec, xi_centers, dbeta):
    """exp(-2 pi i sum_j n_j a_j(xi) dbeta_j) over (lattice..., xi)."""
    grids = _mode_grids(shape)
    avals = flux.a_values(xi_centers)  # (N, B)
    arg = np.zeros(tuple(shape) + (len(xi_centers),))
    for j, g in enumerate(grids):
        arg += g[..., None] * (avals[j] * dbeta[j])[
            (None,) * len(shape) + (slice(None),)]
    return np.exp(-2j * np.pi * arg)


def _spatial_fft(values: np.ndarray, spatial_ndim: int) -> np.ndarray:
    """FFT over the leading spatial axes of (cells..., xi) data."""
    axes = tuple(range(spatial_ndim))
    size = int(np.prod(values.shape[:spatial_ndim]))
    out = np.fft.fftn(values, axes=axes) / size
    for axis, ph in enumerate(_center_phase(values.shape[:spatial_ndim])):
        sl = [None] * values.ndim
        sl[axis] = slice(None)
        out = out * ph[tuple(sl)]
    return out


def u0_component(chi0_bins: np.ndarray, xi_centers, flux: FluxSpec,
                 path: DrivingPath, reg: RegularizerSpec,
                 t: float) -> SpectralField:
    """Transported initial kinetic density under the regularized semigroup.

    chi0_bins holds per-bin averages of chi(u0, .) over the cells (see
    chi_bin_averages); the xi integral is the exact bin sum, so at t = 0
    the result reproduces u0_hat exactly.
    """
    xi_centers = np.asarray(xi_centers, dtype=float)
    h = xi_centers[1] - xi_centers[0]
    spatial = chi0_bins.ndim - 1
    shape = chi0_bins.shape[:spatial]
    chi_hat = _spatial_fft(chi0_bins, spatial)
    beta_t = path.eval(float(t))
    phase = _transport_phase(shape, flux, xi_centers, beta_t)
    damp = np.exp(-reg.multiplier(lattice_abs(shape)) * float(t))
    coeffs = damp * np.sum(phase * chi_hat, axis=-1) * h
    return SpectralField(coeffs)


def _expand_modes(modes, shape):
    out = []
    for mode in modes:
        m = tuple(int(v) for v in np.atleast_1d(mode))
        if len(m) != len(shape):
            raise ValueError("mode dimension mismatch")
        out.append(m)
    return out


def u1_component(chi_times, chi_bins_list, xi_centers, flux: FluxSpec,
                 path: DrivingPath, reg: RegularizerSpec, t: float,
                 modes=None) -> SpectralField:
    """Duhamel term feeding gamma*B*chi back through the semigroup.

    chi_bins_list holds per-bin chi averages at the quadrature times
    chi_times (the last of which must equal t); the time integral is a
    composite trapezoid.  With ``modes`` given, only those coefficients
    (and their conjugates) are evaluated; snapshot density is validated
    against the slowest e-folding among the evaluated modes.
    """
    times = np.asarray(chi_times, dtype=float)
    xi_centers = np.asarray(xi_centers, dtype=float)
    spatial = chi_bins_list[0].ndim - 1
    shape = chi_bins_list[0].shape[:spatial]
    if float(t) == 0.0:  # empty time integral
        return SpectralField(np.zeros(shape, dtype=complex))
    if len(times) < 2 or abs(times[-1] - float(t)) > 1e-9 * max(1.0, t):
        raise ValueError("chi snapshots must end at the evaluation time")
    h = xi_centers[1] - xi_centers[0]

    nabs = lattice_abs(shape)
    if modes is None:
        omega_max = float(np.max(reg.multiplier(nabs)))
    else:
        modes = _expand_modes(modes, shape)
        omega_max = max(reg.multiplier(np.sqrt(sum(v * v for v in m)))
                        for m in modes)
    max_gap = float(np.max(np.diff(times)))
    if max_gap > 1.0 / (8.0 * omega_max) + 1e-12:
        raise ValueError("insufficient chi snapshots: need at least 8 per "
                         "e-folding time of the regularizer")

    beta = path.eval(times)  # (S, N)
    beta_t = path.eval(float(t))
    chi_hats = [_spatial_fft(cb, spatial) for cb in chi_bins_list]

    weights = np.zeros(len(times))
    dt = np.diff(times)
    weights[:-1] += 0.5 * dt
    weights[1:] += 0.5 * dt

    omega = reg.multiplier(nabs)
    coeffs = np.zeros(shape, dtype=complex)
    mask = np.zeros(shape, dtype=bool)
    if modes is None:
        mask[...] = True
    else:
        for m in modes:
            mask[tuple(v % s for v, s in zip(m, shape))] = True
            mask[tuple((-v) % s for v, s in zip(m, shape))] = True
    for s_idx, s in enumerate(times):
        phase = _transport_phase(shape, flux, xi_centers, beta_t - beta[s_idx])
        inner = np.sum(phase * chi_hats[s_idx], axis=-1) * h
        term = omega * np.exp(-omega * (t - s)) * inner
        coeffs[mask] += weights[s_idx] * term[mask]
    return SpectralField(coeffs)


@dataclass
class SplitReport:
    """Per-mode pieces of the u = u0 + u1 + Q identity check."""

    modes: list
    u_hat: np.ndarray
    u0_hat: np.ndarray
    u1_hat: np.ndarray
    q_hat: np.ndarray

    @property
    def defects(self) -> np.ndarray:
        return np.abs(self.u_hat - self.u0_hat - self.u1_hat - self.q_hat)


def _cell_coordinates(shape):
    axes = [cell_centers(m) for m in shape]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)  # (cells, dim)


def q_component_modes(ledger, flux: FluxSpec, path: DrivingPath,
                      reg: RegularizerSpec, t: float, modes,
                      shape) -> np.ndarray:
    """Ledger quadrature of the dissipation term, at selected modes.

    Each bucket's mass acts at its midpoint time s; the xi-derivative of
    the adjoint semigroup brings down the factor
    2 pi i sum_j n_j a_j'(xi) (beta_j(t) - beta_j(s)) on the transported
    phase, and the regularizer contributes exp(-omega_n (t - s)).
    """
    if ledger.cell_pos is None:
        raise ValueError("verify_split needs a cell-resolved ledger")
    modes = _expand_modes(modes, shape)
    centers = ledger.xi_centers
    avals = flux.a_values(centers)            # (N, B)
    aprime = np.stack([c.a_prime(centers) for c in flux.components])
    coords = _cell_coordinates(shape)         # (cells, dim)
    mass = (ledger.cell_pos - ledger.cell_neg).reshape(
        ledger.n_buckets, -1, ledger.n_bins)

    edges = ledger.bucket_edges
    out = np.zeros(len(modes), dtype=complex)
    for k in range(ledger.n_buckets):
        lo, hi = edges[k], edges[k + 1]
        if lo >= t - 1e-12:
            break
        s_mid = 0.5 * (lo + min(hi, t))
        dbeta = path.eval(float(t)) - path.eval(float(s_mid))
        for mi, mode in enumerate(modes):
            nvec = np.asarray(mode, dtype=float)
            nabs = float(np.sqrt(np.sum(nvec * nvec)))
            damp = np.exp(-reg.multiplier(nabs) * (t - s_mid))
            xi_arg = sum(nvec[j] * avals[j] * dbeta[j]
                         for j in range(flux.n_components))
            deriv = sum(nvec[j] * aprime[j] * dbeta[j]
                        for j in range(flux.n_components))
            phase_xi = np.exp(-2j * np.pi * xi_arg)
            phase_x = np.exp(-2j * np.pi * (coords @ nvec))
            m_sp = phase_x @ mass[k]          # (B,) complex
            out[mi] += damp * np.sum(2j * np.pi * deriv * phase_xi * m_sp)
    return out


def verify_split(record, reg: RegularizerSpec, t: float,
                 test_modes) -> SplitReport:
    """Check u(t) = u0(t) + u1(t) + Q(t) mode by mode on a solve record.

    The record must carry chi snapshots at quadrature times up to t and a
    cell-resolved ledger.  Returns the per-mode terms; the defect is the
    quadrature-plus-scheme residual of the identity.
    """
    st = record.snapshot_times
    sel = st <= t + 1e-12
    times = st[sel]
    if len(times) < 1 or abs(times[-1] - t) > 1e-9 * max(1.0, t):
        raise ValueError("record lacks snapshots up to the requested time")
    snaps = [record.snapshots[i] for i in np.nonzero(sel)[0]]
    ledger = record.ledger
    if ledger is None or ledger.cell_pos is None:
        raise ValueError("verify_split needs a cell-resolved ledger")

    edges = ledger.xi_edges
    centers = ledger.xi_centers
    chi_bins = [chi_bin_averages(s, edges) for s in snaps]
    shape = snaps[0].data.shape

    modes = _expand_modes(test_modes, shape)
    u_hat_all = fft_coeffs(snaps[-1])
    u0_all = u0_component(chi_bins[0], centers, record.flux, record.path,
                          reg, t).coeffs
    if len(times) == 1:  # t = 0: the Duhamel and dissipation terms vanish
        u1_all = np.zeros_like(u0_all)
        q_vals = np.zeros(len(modes), dtype=complex)
    else:
        u1_all = u1_component(times, chi_bins, centers, record.flux,
                              record.path, reg, t, modes=modes).coeffs
        q_vals = q_component_modes(ledger, record.flux, record.path, reg, t,
                                   modes, shape)

    idx = [tuple(v % s for v, s in zip(m, shape)) for m in modes]
    u_hat = np.array([u_hat_all[i] for i in idx])
    u0_hat = np.array([u0_all[i] for i in idx])
    u1_hat = np.array([u1_all[i] for i in idx])
    return SplitReport(modes, u_hat, u0_hat, u1_hat, q_vals)


# ---------------------------------------------------------------------------
# Appendix-style integral lemma oracle

def verify_lemma_b(a: float, b, f, iota, w_grid, xi_grid,
                   rtol: float = 1e-3):
    """Quadrature check of the Gaussian-damped phase-integral bound.

    lhs = || exp(-|w|^2/a) int exp(i b(xi) w) f(xi) dxi ||_{L^2(dw)}^2,
    rhs = 2 sqrt(a pi) int_0^inf tau exp(-tau^2) iota(2 tau/sqrt(a)) dtau
          * ||f||_2^2,
    where iota is a nondecreasing modulus bounding the sublevel sets of b.
    Returns (lhs, rhs, lhs <= rhs*(1+rtol)).
    """
    if not a > 0:
        raise ValueError("a must be positive")
    w = np.asarray(w_grid, dtype=float)
    xi = np.asarray(xi_grid, dtype=float)
    bvals = np.asarray(b(xi), dtype=float)
    fvals = np.asarray(f(xi), dtype=float)

    phi2 = np.empty_like(w)
    block = 512
    for i0 in range(0, len(w), block):
        ww = w[i0:i0 + block, None]
        integrand = np.exp(1j * bvals[None, :] * ww) * fvals[None, :]
        inner = np.trapezoid(integrand, xi, axis=1)
        phi2[i0:i0 + block] = (np.exp(-2.0 * ww[:, 0] ** 2 / a)
                               * np.abs(inner) ** 2)
    lhs = float(np.trapezoid(phi2, w))

    nodes, weights = np.polynomial.legendre.leggauss(256)
    tau = 0.5 * 8.0 * (nodes + 1.0)
    wts = 0.5 * 8.0 * weights
    tau_int = float(np.sum(wts * tau * np.exp(-tau ** 2)
                           * np.asarray(iota(2.0 * tau / np.sqrt(a)))))
    f_l2 = float(np.trapezoid(fvals ** 2, xi))
    rhs = 2.0 * np.sqrt(a * np.pi) * tau_int * f_l2
    return lhs, rhs, bool(lhs <= rhs * (1.0 + rtol))


# ---------------------------------------------------------------------------
# gamma-scaling probe for the transported-density energy

@dataclass
class ScalingResult:
    gammas: np.ndarray
    energies: np.ndarray
    stderrs: np.ndarray
    slope: float

    def envelope_ok(self, theta: float, factor: float = 2.0) -> bool:
        """Measured energies sit under C * gamma^{-(2-theta)/2}."""
        ref = self.energies[0] * (self.gammas / self.gammas[0]) ** (
            -(2.0 - theta) / 2.0)
        return bool(np.all(self.energies <= factor * ref))


def u0_energy_scaling(flux: FluxSpec, gammas, alpha: float, u0: Field,
                      mc_paths: int, horizon: float, base_seed: int,
                      segments: int = 64, refine_level: int = 0,
                      xi_bins: int = 256, time_nodes: int = 48,
                      ) -> ScalingResult:
    """Monte Carlo estimate of the time-integrated energy of u0(t).

    For each regularization strength gamma the quantity
    E int_0^T ||u0(t)||_2^2 dt is averaged over sampled driving paths;
    the heavy transport integral is computed once per path and reused for
    every gamma.  Returns per-gamma means, standard errors and the fitted
    log-log slope.
    """
    gammas = np.asarray(sorted(float(g) for g in gammas))
    if len(gammas) < 4 or gammas[-1] / gammas[0] < 8 * (1 - 1e-12):
        raise ValueError("need >= 4 gammas spanning at least a decade "
                         "(factor 8 geometric grid counts)")
    if mc_paths < 32:
        raise ValueError("need at least 32 Monte Carlo paths")

    lo = min(float(u0.data.min()), 0.0)
    hi = max(float(u0.data.max()), 0.0)
    pad = 0.05 * max(hi - lo, 1e-12)
    edges = np.linspace(lo - pad, hi + pad, xi_bins + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    h = centers[1] - centers[0]
    chi0 = chi_bin_averages(u0, edges)
    spatial = chi0.ndim - 1
    shape = chi0.shape[:spatial]
    chi_hat = _spatial_fft(chi0, spatial)
    nabs = lattice_abs(shape)

    nodes, wts = np.polynomial.legendre.leggauss(time_nodes)
    tgrid = 0.5 * horizon * (nodes + 1.0)
    twts = 0.5 * horizon * wts

    energies = np.zeros((mc_paths, len(gammas)))
    for p in range(mc_paths):
        path = sample_brownian(derive_seed(base_seed, p),
                               flux.n_components, horizon, segments)
        for _ in range(refine_level):
            path = refine(path)
        beta = path.eval(tgrid)  # (T, N)
        s2 = np.zeros((time_nodes,) + shape)
        for ti in range(time_nodes):
            phase = _transport_phase(shape, flux, centers, beta[ti])
            s2[ti] = np.abs(np.sum(phase * chi_hat, axis=-1) * h) ** 2
        for gi, g in enumerate(gammas):
            damp = np.exp(-2.0 * g * (nabs ** (2 * alpha) + 1.0)
                          * tgrid[(slice(None),) + (None,) * len(shape)])
            energies[p, gi] = float(np.sum(
                twts * np.sum(damp * s2, axis=tuple(range(1, 1 + len(shape))))))
    means = energies.mean(axis=0)
    errs = energies.std(axis=0, ddof=1) / np.sqrt(mc_paths)
    slope = float(np.polyfit(np.log(gammas), np.log(means), 1)[0])
    return ScalingResult(gammas, means, errs, slope)
