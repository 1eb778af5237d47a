"""
Temperature-dependent thermophysical properties of the slab.

K(T)    = k_ref      * sum_i a_i (T / 298.15)^i
rho_cp  = rho_cp_ref * sum_i b_i (T / 298.15)^i

and the Kirchhoff transformation

theta(T) = (1 / k_ref) * integral_{298.15}^{T} K(T') dT'

which turns d/dx(K dT/dx) into k_ref * d2(theta)/dx2.
"""

import logging
from typing import Optional, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from errors import ConfigError, DomainError, ThetaRangeError

logger = logging.getLogger(__name__)

T_REF = 298.15
COEFF_SUM_TOL = 1e-12

ArrayLike = Union[float, np.ndarray]


class MaterialModel(BaseModel):
    """Immutable property model; coefficient vectors must each sum to 1."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    k_ref: float = Field(gt=0, description="conductivity at 298.15 K, W/(m K)")
    k_coeffs: Tuple[float, ...] = (1.0,)
    rho_cp_ref: float = Field(gt=0, description="volumetric heat capacity at 298.15 K, J/(m3 K)")
    rho_cp_coeffs: Tuple[float, ...] = (1.0,)
    t_min: float = 250.0
    t_max: float = 450.0

    @property
    def t_ref(self) -> float:
        return T_REF

    @field_validator("k_coeffs", "rho_cp_coeffs")
    @classmethod
    def _normalized(cls, coeffs: Tuple[float, ...]) -> Tuple[float, ...]:
        if len(coeffs) == 0:
            raise ValueError("coefficient list is empty")
        if abs(sum(coeffs) - 1.0) > COEFF_SUM_TOL:
            raise ValueError(f"coefficients {list(coeffs)} sum to {sum(coeffs)!r}, expected 1")
        return coeffs

    @model_validator(mode="after")
    def _positive_over_range(self) -> "MaterialModel":
        if not self.t_min < self.t_max:
            raise ValueError(f"t_min={self.t_min} must be below t_max={self.t_max}")
        lo, hi = self.t_min / T_REF, self.t_max / T_REF
        for name, coeffs in (("k_coeffs", self.k_coeffs), ("rho_cp_coeffs", self.rho_cp_coeffs)):
            poly = Polynomial(coeffs)
            # a polynomial that is positive at both ends and has no real root
            # in between is positive on the whole interval
            candidates = [lo, hi] + [
                r.real for r in poly.roots() if abs(r.imag) < 1e-12 and lo <= r.real <= hi
            ]
            if min(poly(c) for c in candidates) <= 0.0:
                raise ValueError(f"{name} gives a non-positive property inside [{self.t_min}, {self.t_max}] K")
        return self


PRESETS = {
    "constant": dict(k_ref=0.19, k_coeffs=(1.0,), rho_cp_ref=1.7e6, rho_cp_coeffs=(1.0,)),
    # Representative PMMA literature values below the glass transition; not
    # fitted to any measurement.
    "pmma-default": dict(k_ref=0.19, k_coeffs=(0.7, 0.3), rho_cp_ref=1.7e6, rho_cp_coeffs=(0.05, 0.95)),
}


def preset(name: str, **overrides) -> MaterialModel:
    if name not in PRESETS:
        raise ConfigError(f"unknown material preset '{name}', expected one of {sorted(PRESETS)}")
    values = dict(PRESETS[name])
    values.update({k: v for k, v in overrides.items() if v is not None})
    return MaterialModel(**values)


def _check_range(model: MaterialModel, T: ArrayLike) -> np.ndarray:
    T = np.asarray(T, dtype=float)
    bad = (T < model.t_min) | (T > model.t_max) | ~np.isfinite(T)
    if np.any(bad):
        value = T[bad].flat[0] if T.ndim else float(T)
        error_msg = f"temperature {value!r} K outside valid range [{model.t_min}, {model.t_max}] K"
        logger.error(error_msg)
        raise DomainError(error_msg)
    return T


def _poly(coeffs: Tuple[float, ...], s: np.ndarray) -> np.ndarray:
    return np.polynomial.polynomial.polyval(s, coeffs)


def conductivity(model: MaterialModel, T: ArrayLike) -> ArrayLike:
    T = _check_range(model, T)
    return model.k_ref * _poly(model.k_coeffs, T / T_REF)


def volumetric_heat_capacity(model: MaterialModel, T: ArrayLike) -> ArrayLike:
    T = _check_range(model, T)
    return model.rho_cp_ref * _poly(model.rho_cp_coeffs, T / T_REF)


def kirchhoff_theta(model: MaterialModel, T: ArrayLike) -> ArrayLike:
    """Closed-form antiderivative: T_ref * sum_i a_i (s^(i+1) - 1) / (i + 1)."""
    T = _check_range(model, T)
    s = T / T_REF
    theta = np.zeros_like(s)
    for i, a in enumerate(model.k_coeffs):
        theta = theta + a * (s ** (i + 1) - 1.0) / (i + 1)
    return T_REF * theta


def kirchhoff_derivative(model: MaterialModel, T: ArrayLike) -> ArrayLike:
    """d(theta)/dT = K(T) / k_ref."""
    T = _check_range(model, T)
    return _poly(model.k_coeffs, T / T_REF)


def kirchhoff_inverse(
    model: MaterialModel,
    theta: ArrayLike,
    guess: Optional[ArrayLike] = None,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> ArrayLike:
    """Invert theta(T) by Newton's method kept inside a shrinking bracket.

    A Newton iterate that leaves the bracket is replaced by the bracket
    midpoint. When ``guess`` already satisfies theta(guess) == theta exactly,
    it is returned unchanged.
    """
    theta = np.asarray(theta, dtype=float)
    lo_theta = kirchhoff_theta(model, model.t_min)
    hi_theta = kirchhoff_theta(model, model.t_max)
    bad = (theta < lo_theta) | (theta > hi_theta) | ~np.isfinite(theta)
    if np.any(bad):
        value = theta[bad].flat[0] if theta.ndim else float(theta)
        error_msg = f"theta {value!r} outside the image [{lo_theta}, {hi_theta}] of the valid range"
        logger.error(error_msg)
        raise ThetaRangeError(error_msg)

    lo = np.full(theta.shape, model.t_min)
    hi = np.full(theta.shape, model.t_max)
    if guess is None:
        T = np.clip(T_REF + theta, model.t_min, model.t_max)
    else:
        T = np.clip(np.asarray(guess, dtype=float), model.t_min, model.t_max) * np.ones(theta.shape)

    for _ in range(max_iter):
        residual = kirchhoff_theta(model, T) - theta
        lo = np.where(residual < 0, T, lo)
        hi = np.where(residual > 0, T, hi)
        step = residual / kirchhoff_derivative(model, T)
        candidate = T - step
        outside = (candidate <= lo) | (candidate >= hi)
        candidate = np.where(outside & (residual != 0), 0.5 * (lo + hi), candidate)
        candidate = np.where(residual == 0, T, candidate)
        moved = np.max(np.abs(candidate - T)) if candidate.size else 0.0
        T = candidate
        if moved < tol:
            break
    else:
        logger.warning("kirchhoff_inverse stopped after %d iterations", max_iter)

    return T if T.ndim else float(T)
