"""
Implicit finite-difference advance of the transient energy equation

    rho_cp(T) dT/dt = d/dx( K(T) dT/dx ) + S_r

written in the Kirchhoff variable theta so the spatial operator is
k_ref * d2(theta)/dx2. Backward Euler in time, Picard relinearization of
rho_cp(T) and of the theta <-> T map, Dirichlet ends.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from errors import ConvergenceError, DimensionError, DomainError, GridError, SolverError
from material import (
    MaterialModel,
    conductivity,
    kirchhoff_derivative,
    kirchhoff_inverse,
    kirchhoff_theta,
    volumetric_heat_capacity,
)

logger = logging.getLogger(__name__)

# Tolerance for comparing a step time against the end of the ramp.
_RAMP_END_RTOL = 1e-12


@dataclass(frozen=True)
class Grid1D:
    length: float
    n_nodes: int

    def __post_init__(self):
        if self.n_nodes < 3:
            raise GridError(f"n_nodes={self.n_nodes}: at least 3 nodes are required")
        if not self.length > 0:
            raise GridError(f"length={self.length!r} m must be positive")

    @property
    def dx(self) -> float:
        return self.length / (self.n_nodes - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.n_nodes)


@dataclass(frozen=True)
class ThermalState:
    """Temperature snapshot; the array is copied and made read-only."""

    t: float
    T: np.ndarray

    def __post_init__(self):
        T = np.array(self.T, dtype=float)
        T.flags.writeable = False
        object.__setattr__(self, "T", T)


@dataclass(frozen=True)
class BoundarySchedule:
    """Front-face temperature f(t) and fixed back-face temperature T_E.

    ``after_ramp="drop"`` returns base_T once t > ramp_end, exactly as the
    piecewise law is written; ``"hold"`` keeps the peak value instead.
    """

    ramp_rate: float = 50.0
    ramp_end: float = 1.0
    base_T: float = 300.0
    T_E: float = 300.0
    after_ramp: str = "drop"

    def __post_init__(self):
        if self.after_ramp not in ("drop", "hold"):
            raise DomainError(f"after_ramp='{self.after_ramp}', expected 'drop' or 'hold'")
        if self.ramp_end < 0:
            raise DomainError(f"ramp_end={self.ramp_end!r} s must be non-negative")


@dataclass(frozen=True)
class StepResult:
    state: ThermalState
    picard_iterations: int
    picard_change: float


def boundary_temperature(sched: BoundarySchedule, t: float) -> float:
    if t < 0:
        error_msg = f"time {t!r} s is negative"
        logger.error(error_msg)
        raise DomainError(error_msg)
    if t <= sched.ramp_end * (1.0 + _RAMP_END_RTOL):
        return sched.ramp_rate * t + sched.base_T
    if sched.after_ramp == "hold":
        return sched.ramp_rate * sched.ramp_end + sched.base_T
    return sched.base_T


def solve_tridiagonal(a: Sequence[float], b: Sequence[float], c: Sequence[float], d: Sequence[float]) -> np.ndarray:
    """
    Thomas algorithm for A p = d, A banded with diagonals at offsets -1, 0, 1

    Input
        a: sub-diagonal, length n-1
        b: diagonal, length n
        c: super-diagonal, length n-1
        d: right-hand side, length n
    """
    a, b, c, d = (np.asarray(v, dtype=float).tolist() for v in (a, b, c, d))
    n = len(d)
    w = [0.0] * (n - 1)
    g = [0.0] * n
    p = [0.0] * n

    # Forward sweep
    if b[0] == 0.0:
        raise SolverError("singular tridiagonal system: zero pivot in row 0")
    if n > 1:
        w[0] = c[0] / b[0]
    g[0] = d[0] / b[0]
    for i in range(1, n):
        pivot = b[i] - a[i - 1] * w[i - 1]
        if pivot == 0.0:
            raise SolverError(f"singular tridiagonal system: zero pivot in row {i}")
        if i < n - 1:
            w[i] = c[i] / pivot
        g[i] = (d[i] - a[i - 1] * g[i - 1]) / pivot

    # Back substitution
    p[n - 1] = g[n - 1]
    for i in range(n - 1, 0, -1):
        p[i - 1] = g[i - 1] - w[i - 1] * p[i]
    return np.array(p)


def _check_profile(name: str, values: np.ndarray, grid: Grid1D) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.n_nodes,):
        raise DimensionError(f"{name} has shape {values.shape}, expected ({grid.n_nodes},)")
    return values


def advance(
    state: ThermalState,
    S_r: np.ndarray,
    model: MaterialModel,
    grid: Grid1D,
    sched: BoundarySchedule,
    dt: float,
    picard_tol: float = 1e-8,
    picard_max: int = 50,
    t_new: float = None,
) -> StepResult:
    """One backward-Euler step; see ``implicit_step``.

    Each Picard pass freezes rho_cp and d(theta)/dT at the latest iterate T^k
    and solves for the increment delta = theta^{k+1} - theta(T^k):

        rho_cp (T^k - T_old + delta / theta'(T^k)) / dt
            = k_ref * D2(theta(T^k) + delta) + S_r
    """
    if not dt > 0:
        raise DomainError(f"dt={dt!r} s must be positive")
    T_old = _check_profile("temperature", state.T, grid)
    S_r = _check_profile("S_r", S_r, grid)
    if t_new is None:
        t_new = state.t + dt

    n = grid.n_nodes
    coef = model.k_ref / grid.dx ** 2

    T_k = T_old.copy()
    T_k[0] = boundary_temperature(sched, t_new)
    T_k[-1] = sched.T_E

    lower = np.zeros(n - 1)
    upper = np.zeros(n - 1)
    lower[:-1] = -coef
    upper[1:] = -coef
    diag = np.ones(n)
    rhs = np.zeros(n)

    change = np.inf
    for iteration in range(1, picard_max + 1):
        theta = kirchhoff_theta(model, T_k)
        rho_cp = volumetric_heat_capacity(model, T_k)
        a = rho_cp / (kirchhoff_derivative(model, T_k) * dt)

        diag[1:-1] = a[1:-1] + 2.0 * coef
        rhs[1:-1] = (
            -rho_cp[1:-1] * (T_k[1:-1] - T_old[1:-1]) / dt
            + coef * (theta[2:] - 2.0 * theta[1:-1] + theta[:-2])
            + S_r[1:-1]
        )
        delta = solve_tridiagonal(lower, diag, upper, rhs)

        T_next = T_k.copy()
        T_next[1:-1] = kirchhoff_inverse(model, theta[1:-1] + delta[1:-1], guess=T_k[1:-1])
        change = float(np.max(np.abs(T_next - T_k)))
        T_k = T_next
        logger.debug("picard %d: max change %.3e K", iteration, change)
        if change < picard_tol:
            return StepResult(ThermalState(t_new, T_k), iteration, change)

    error_msg = f"Picard iteration did not converge in {picard_max} iterations at t={t_new}"
    logger.error(error_msg)
    raise ConvergenceError(error_msg, residual=change, iterations=picard_max)


def implicit_step(
    state: ThermalState,
    S_r: np.ndarray,
    model: MaterialModel,
    grid: Grid1D,
    sched: BoundarySchedule,
    dt: float,
    picard_tol: float = 1e-8,
    picard_max: int = 50,
) -> ThermalState:
    """Advance the temperature profile by ``dt`` with radiative source ``S_r``."""
    return advance(state, S_r, model, grid, sched, dt, picard_tol, picard_max).state


def conductive_flux(model: MaterialModel, state: ThermalState, grid: Grid1D) -> np.ndarray:
    """q_c = -K(T) dT/dx; central differences inside, second-order one-sided at the ends."""
    T = _check_profile("temperature", state.T, grid)
    return -conductivity(model, T) * np.gradient(T, grid.dx, edge_order=2)


def energy_residual(
    model: MaterialModel,
    grid: Grid1D,
    T_old: np.ndarray,
    T_new: np.ndarray,
    S_r: np.ndarray,
    dt: float,
) -> float:
    """Relative imbalance of one step over the interior control volumes.

    Stored energy sum(rho_cp dT) dx is compared against dt times the face
    fluxes through the first and last interior faces plus the integrated
    source. The result is normalized by the sum of the absolute terms.
    """
    T_old = _check_profile("T_old", T_old, grid)
    T_new = _check_profile("T_new", T_new, grid)
    S_r = _check_profile("S_r", S_r, grid)
    dx = grid.dx

    theta = kirchhoff_theta(model, T_new)
    flux_in = -model.k_ref * (theta[1] - theta[0]) / dx
    flux_out = -model.k_ref * (theta[-1] - theta[-2]) / dx
    stored = volumetric_heat_capacity(model, T_new[1:-1]) * (T_new[1:-1] - T_old[1:-1]) * dx
    source = S_r[1:-1] * dx

    imbalance = np.sum(stored) - dt * (flux_in - flux_out + np.sum(source))
    scale = np.sum(np.abs(stored)) + dt * (abs(flux_in) + abs(flux_out) + np.sum(np.abs(source)))
    if scale == 0.0:
        return 0.0
    return float(abs(imbalance) / scale)
