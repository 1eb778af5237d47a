"""
Quasi-steady spectral radiative transfer in a 1D slab (discrete ordinates).

Per band j and direction cosine mu,

    mu dI/dx = -beta_j I + J,   J = kappa_j I_b(T) + (albedo_j beta_j / 2) sum_k w_k I_k

with black walls at the front (x = 0) and back (x = E) temperatures. The
sweep produces the radiative flux q_r = 2 pi sum_j sum_k w_k mu_k I and the
source S_r = -dq_r/dx handed to the conduction solver.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import special

from conduction import Grid1D
from errors import ConfigError, ConvergenceError, DimensionError, DomainError, GridError

logger = logging.getLogger(__name__)

# Planck law constants
C1 = 1.19e-16  # W m^2
C2 = 1.44e-2  # m K

# Gauss-Legendre points per panel used by band_emission
PANEL_ORDER = 16

# Below this optical thickness the linear-source weight uses its series form.
_SMALL_TAU = 1e-3


@dataclass(frozen=True)
class SpectralBand:
    lambda_lo: float
    lambda_hi: float
    beta: float
    albedo: float = 0.0

    def __post_init__(self):
        if not 0 < self.lambda_lo <= self.lambda_hi:
            raise ConfigError(f"band [{self.lambda_lo}, {self.lambda_hi}] m: need 0 < lambda_lo <= lambda_hi")
        if self.beta < 0:
            raise ConfigError(f"band extinction coefficient beta={self.beta} must be non-negative")
        if not 0.0 <= self.albedo <= 1.0:
            raise ConfigError(f"band albedo={self.albedo} must lie in [0, 1]")

    @property
    def kappa(self) -> float:
        return self.beta * (1.0 - self.albedo)


def validate_bands(bands: Sequence[SpectralBand]) -> Tuple[SpectralBand, ...]:
    """Bands must be ordered, contiguous and non-overlapping."""
    bands = tuple(bands)
    if not bands:
        raise ConfigError("at least one spectral band is required")
    for left, right in zip(bands, bands[1:]):
        if abs(left.lambda_hi - right.lambda_lo) > 1e-12 * right.lambda_lo:
            raise ConfigError(
                f"bands not contiguous: [{left.lambda_lo}, {left.lambda_hi}] then [{right.lambda_lo}, {right.lambda_hi}]"
            )
    return bands


@dataclass(frozen=True)
class OrdinateSet:
    """Positive-hemisphere nodes/weights; the negative hemisphere mirrors them."""

    mu: np.ndarray
    weight: np.ndarray

    @property
    def n(self) -> int:
        return len(self.mu)

    @property
    def signed_mu(self) -> np.ndarray:
        return np.concatenate([self.mu, -self.mu])

    @property
    def signed_weight(self) -> np.ndarray:
        return np.concatenate([self.weight, self.weight])


@dataclass(frozen=True)
class RadiativeBoundary:
    """Black walls at T_front / T_back unless per-band inflow intensities are fixed."""

    T_front: float
    T_back: float
    front_intensity: Optional[Sequence[float]] = None
    back_intensity: Optional[Sequence[float]] = None


@dataclass(frozen=True)
class IntensityField:
    """I[band, signed ordinate, node]; ordinates ordered +mu first, then -mu."""

    intensity: np.ndarray
    grid: Grid1D
    scatter_iterations: int = 1


def planck_intensity(wavelength, T):
    """Blackbody spectral intensity C1 / (lambda^5 (exp(C2 / (lambda T)) - 1)), W/(m^2 m sr)."""
    wavelength = np.asarray(wavelength, dtype=float)
    T = np.asarray(T, dtype=float)
    if np.any(wavelength <= 0) or np.any(T <= 0):
        error_msg = f"planck_intensity needs positive wavelength and temperature, got {wavelength!r} m, {T!r} K"
        logger.error(error_msg)
        raise DomainError(error_msg)
    with np.errstate(over="ignore"):
        return C1 / (wavelength ** 5 * np.expm1(C2 / (wavelength * T)))


def _panel_nodes(n_sub: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [0, 1] with n_sub equal panels."""
    x, w = special.roots_legendre(PANEL_ORDER)
    edges = np.linspace(0.0, 1.0, n_sub + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def band_emission(band: SpectralBand, T, n_sub: int = 8):
    """Band-integrated blackbody intensity, W/(m^2 sr).

    The panels are laid out in u = C2 / (lambda T), the variable in which the
    Planck integrand u^3 / (e^u - 1) is smooth across the whole band; each
    panel is integrated with PANEL_ORDER Gauss-Legendre points.
    """
    if n_sub < 2:
        raise ConfigError(f"n_sub={n_sub}: at least 2 panels are required")
    T = np.asarray(T, dtype=float)
    if band.lambda_hi == band.lambda_lo:
        return np.zeros_like(T) if T.ndim else 0.0
    if np.any(T <= 0):
        error_msg = f"band_emission needs positive temperature, got {T!r} K"
        logger.error(error_msg)
        raise DomainError(error_msg)

    nodes, weights = _panel_nodes(n_sub)
    T_col = T[..., None]
    u_lo = C2 / (band.lambda_hi * T_col)
    u_hi = C2 / (band.lambda_lo * T_col)
    u = u_lo + (u_hi - u_lo) * nodes
    wavelength = C2 / (u * T_col)
    integrand = planck_intensity(wavelength, T_col) * C2 / (T_col * u ** 2)
    return np.sum(integrand * weights, axis=-1) * (u_hi - u_lo)[..., 0]


def build_quadrature(n: int) -> OrdinateSet:
    """Gauss-Legendre ordinates mapped from [-1, 1] onto (0, 1]."""
    if not 1 <= n <= 64:
        raise ConfigError(f"n_ordinates={n}: expected 1 <= n <= 64")
    x, w = special.roots_legendre(n)
    mu = 0.5 * (x + 1.0)
    weight = 0.5 * w
    weight = weight / np.sum(weight)
    return OrdinateSet(mu=mu, weight=weight)


def march_ordinate(inflow, source, tau):
    """Upwind marching with exact attenuation and a linear source in each cell.

    Args:
        inflow: intensity entering at the first node, shape (...)
        source: source function S = J / beta at the nodes in marching order, shape (..., n)
        tau: optical thickness of one cell along the ray, shape (...)

    Over a cell, I_out = I_in e^-tau + S_in (w0 - w1) + S_out w1 with
    w0 = 1 - e^-tau and w1 = (tau - w0) / tau.
    """
    source = np.asarray(source, dtype=float)
    tau = np.broadcast_to(np.asarray(tau, dtype=float), source.shape[:-1])
    attenuation = np.exp(-tau)
    w0 = -np.expm1(-tau)
    with np.errstate(divide="ignore", invalid="ignore"):
        w1 = np.where(tau < _SMALL_TAU, tau / 2.0 - tau ** 2 / 6.0 + tau ** 3 / 24.0, (tau - w0) / tau)
    a = w0 - w1

    intensity = np.empty(source.shape)
    intensity[..., 0] = inflow
    for i in range(source.shape[-1] - 1):
        intensity[..., i + 1] = intensity[..., i] * attenuation + source[..., i] * a + source[..., i + 1] * w1
    return intensity


def _inflow(bands, override, T_wall, n_sub) -> np.ndarray:
    if override is not None:
        values = np.asarray(override, dtype=float)
        if values.shape != (len(bands),):
            raise DimensionError(f"boundary intensity has shape {values.shape}, expected ({len(bands)},)")
        return values
    return np.array([band_emission(band, T_wall, n_sub) for band in bands])


def sweep_intensity(
    grid: Grid1D,
    bands: Sequence[SpectralBand],
    ordinates: OrdinateSet,
    T_profile: np.ndarray,
    bc: RadiativeBoundary,
    scatter_tol: float = 1e-8,
    max_scatter_iters: int = 200,
    n_sub: int = 8,
    emit: bool = True,
) -> IntensityField:
    """Solve the RTE for every band and ordinate given the temperature profile.

    Directions with mu > 0 are marched from x = 0, mu < 0 from x = E. With
    scattering, the isotropic in-scattering source is iterated until the
    relative change of the mean intensity drops below ``scatter_tol``.
    """
    T_profile = np.asarray(T_profile, dtype=float)
    if T_profile.shape != (grid.n_nodes,):
        raise DimensionError(f"T_profile has shape {T_profile.shape}, expected ({grid.n_nodes},)")

    beta = np.array([band.beta for band in bands])
    albedo = np.array([band.albedo for band in bands])
    if emit:
        I_b = np.stack([band_emission(band, T_profile, n_sub) for band in bands])
    else:
        I_b = np.zeros((len(bands), grid.n_nodes))
    front = _inflow(bands, bc.front_intensity, bc.T_front, n_sub)
    back = _inflow(bands, bc.back_intensity, bc.T_back, n_sub)

    # (band, ordinate) arrays
    tau = beta[:, None] * grid.dx / ordinates.mu[None, :]
    front = np.broadcast_to(front[:, None], tau.shape)
    back = np.broadcast_to(back[:, None], tau.shape)
    weight = ordinates.weight

    scattering = bool(np.any(albedo > 0))
    mean_intensity = I_b.copy()
    change = 0.0
    for iteration in range(1, max_scatter_iters + 1):
        source = (1.0 - albedo)[:, None] * I_b + albedo[:, None] * mean_intensity
        source = np.broadcast_to(source[:, None, :], tau.shape + (grid.n_nodes,))
        forward = march_ordinate(front, source, tau)
        backward = march_ordinate(back, source[..., ::-1], tau)[..., ::-1]
        if not scattering:
            break
        updated = 0.5 * (np.tensordot(weight, forward, axes=([0], [1])) + np.tensordot(weight, backward, axes=([0], [1])))
        peak = np.max(np.abs(updated))
        change = float(np.max(np.abs(updated - mean_intensity)) / peak) if peak > 0 else 0.0
        mean_intensity = updated
        logger.debug("scatter iteration %d: relative change %.3e", iteration, change)
        if change < scatter_tol:
            break
    else:
        error_msg = f"scattering source iteration did not converge in {max_scatter_iters} iterations"
        logger.error(error_msg)
        raise ConvergenceError(error_msg, residual=change, iterations=max_scatter_iters)

    intensity = np.concatenate([forward, backward], axis=1)
    return IntensityField(intensity=intensity, grid=grid, scatter_iterations=iteration)


def radiative_flux(field: IntensityField, ordinates: OrdinateSet, bands: Sequence[SpectralBand]) -> np.ndarray:
    """q_r(x) = 2 pi sum_bands sum_signed_ordinates w mu I, positive toward +x."""
    intensity = field.intensity
    expected = (len(bands), 2 * ordinates.n, field.grid.n_nodes)
    if intensity.shape != expected:
        raise DimensionError(f"intensity field has shape {intensity.shape}, expected {expected}")
    moment = ordinates.signed_weight * ordinates.signed_mu
    per_band = np.tensordot(moment, intensity, axes=([0], [1]))
    return 2.0 * np.pi * np.sum(per_band, axis=0)


def radiative_source(q_r: np.ndarray, grid: Grid1D) -> np.ndarray:
    """S_r = -dq_r/dx, second order everywhere (one-sided at the walls)."""
    q_r = np.asarray(q_r, dtype=float)
    if q_r.shape[0] < 3:
        raise GridError(f"radiative_source needs at least 3 nodes, got {q_r.shape[0]}")
    if q_r.shape != (grid.n_nodes,):
        raise DimensionError(f"q_r has shape {q_r.shape}, expected ({grid.n_nodes},)")
    return -np.gradient(q_r, grid.dx, edge_order=2)
