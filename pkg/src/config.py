"""
JSON run configuration and process environment.

The run document is validated by pydantic models keyed exactly like the JSON
(``grid.n_nodes``, ``time.dt_s``, ``bc.ramp_rate``, ...). Process-level knobs
(thread cap, logging) come from ``THERMOFLUX_*`` environment variables or a
``.env`` file.
"""

import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, List, Literal, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from conduction import BoundarySchedule, Grid1D
from errors import ConfigError
from material import preset
from radiation import SpectralBand
from simulation import SimulationConfig

logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridSettings(_Section):
    length_m: float = Field(0.1, gt=0)
    n_nodes: int = Field(201, ge=3)


class TimeSettings(_Section):
    dt_s: float = Field(0.1, gt=0)
    t_end_s: float = Field(100.0, gt=0)


class BoundarySettings(_Section):
    ramp_rate: float = 50.0
    ramp_end: float = Field(1.0, ge=0)
    base_T: float = 300.0
    T_E: float = 300.0
    after_ramp: Literal["drop", "hold"] = "drop"


class MaterialSettings(_Section):
    preset: Literal["constant", "pmma-default"] = "constant"
    k_ref: Optional[float] = None
    k_coeffs: Optional[List[float]] = None
    rho_cp_ref: Optional[float] = None
    rho_cp_coeffs: Optional[List[float]] = None
    t_min: Optional[float] = None
    t_max: Optional[float] = None


class BandSettings(_Section):
    lambda_lo_m: float
    lambda_hi_m: float
    beta_per_m: float = Field(ge=0)
    albedo: float = Field(0.0, ge=0, le=1)


# Placeholder PMMA-like bands: nearly transparent in the near infrared,
# opaque beyond a few micrometres. Not measured data.
DEFAULT_BANDS = [
    BandSettings(lambda_lo_m=0.5e-6, lambda_hi_m=2.5e-6, beta_per_m=15.0),
    BandSettings(lambda_lo_m=2.5e-6, lambda_hi_m=6.0e-6, beta_per_m=500.0),
    BandSettings(lambda_lo_m=6.0e-6, lambda_hi_m=15.0e-6, beta_per_m=5000.0),
    BandSettings(lambda_lo_m=15.0e-6, lambda_hi_m=50.0e-6, beta_per_m=8000.0),
]


class RadiationSettings(_Section):
    enabled: bool = True
    n_ordinates: int = Field(8, ge=1, le=64)
    n_sub: int = Field(8, ge=2)
    scatter_tol: float = Field(1e-8, gt=0)
    max_scatter_iters: int = Field(200, ge=1)
    bands: List[BandSettings] = Field(default_factory=lambda: [b.model_copy() for b in DEFAULT_BANDS], min_length=1)


class CouplingSettings(_Section):
    couple_tol: float = Field(1e-6, gt=0)
    couple_max: int = Field(20, ge=1)
    picard_tol: float = Field(1e-8, gt=0)
    picard_max: int = Field(50, ge=1)


class OutputSettings(_Section):
    snapshot_times_s: List[float] = Field(default_factory=lambda: [1.0, 5.0, 10.0, 50.0, 100.0])
    snapshot_every_s: Optional[float] = Field(None, gt=0)
    steady_window: int = Field(10, ge=2)
    steady_eps_K: float = Field(0.05, gt=0)


class SimulationSettings(_Section):
    grid: GridSettings = Field(default_factory=GridSettings)
    time: TimeSettings = Field(default_factory=TimeSettings)
    bc: BoundarySettings = Field(default_factory=BoundarySettings)
    material: MaterialSettings = Field(default_factory=MaterialSettings)
    radiation: RadiationSettings = Field(default_factory=RadiationSettings)
    coupling: CouplingSettings = Field(default_factory=CouplingSettings)
    output: OutputSettings = Field(default_factory=OutputSettings)


class RuntimeSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="THERMOFLUX_", env_file=".env", extra="ignore")

    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    log_level: str = "INFO"
    log_dir: Optional[str] = "logs"


def _describe(error: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(part) for part in item['loc'])}: {item['msg']}" for item in error.errors()
    )


def validate_settings(data: Mapping[str, Any]) -> SimulationSettings:
    try:
        return SimulationSettings.model_validate(data)
    except ValidationError as e:
        error_msg = f"invalid configuration: {_describe(e)}"
        logger.error(error_msg)
        raise ConfigError(error_msg) from e


def load_config(path: Optional[Union[str, Path]]) -> SimulationSettings:
    """Read a JSON configuration; ``None`` gives the defaults."""
    if path is None:
        return SimulationSettings()
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"configuration file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    logger.info(f"Loaded configuration from {path}")
    return validate_settings(data)


def apply_overrides(settings: SimulationSettings, overrides: Mapping[str, Any]) -> SimulationSettings:
    """Return a copy with dotted keys (``"bc.ramp_rate"``) replaced and revalidated."""
    data = settings.model_dump()
    for key, value in overrides.items():
        parts = key.split(".")
        node = data
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                raise ConfigError(f"unknown configuration key '{key}'")
            node = node[part]
        if parts[-1] not in node:
            raise ConfigError(f"unknown configuration key '{key}'")
        node[parts[-1]] = value
    return validate_settings(data)


def config_hash(settings: SimulationSettings) -> str:
    canonical = json.dumps(settings.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _tuple(values: Optional[List[float]]) -> Optional[Tuple[float, ...]]:
    return tuple(values) if values is not None else None


def build_simulation_config(settings: SimulationSettings) -> SimulationConfig:
    """Translate validated settings into solver objects; domain checks raise ConfigError or GridError."""
    m = settings.material
    try:
        material = preset(
            m.preset,
            k_ref=m.k_ref,
            k_coeffs=_tuple(m.k_coeffs),
            rho_cp_ref=m.rho_cp_ref,
            rho_cp_coeffs=_tuple(m.rho_cp_coeffs),
            t_min=m.t_min,
            t_max=m.t_max,
        )
    except ValidationError as e:
        raise ConfigError(f"invalid material: {_describe(e)}") from e

    bands = tuple(
        SpectralBand(lambda_lo=b.lambda_lo_m, lambda_hi=b.lambda_hi_m, beta=b.beta_per_m, albedo=b.albedo)
        for b in settings.radiation.bands
    )
    bc = settings.bc
    return SimulationConfig(
        grid=Grid1D(settings.grid.length_m, settings.grid.n_nodes),
        material=material,
        bands=bands,
        schedule=BoundarySchedule(
            ramp_rate=bc.ramp_rate,
            ramp_end=bc.ramp_end,
            base_T=bc.base_T,
            T_E=bc.T_E,
            after_ramp=bc.after_ramp,
        ),
        dt=settings.time.dt_s,
        t_end=settings.time.t_end_s,
        n_ordinates=settings.radiation.n_ordinates,
        n_sub=settings.radiation.n_sub,
        scatter_tol=settings.radiation.scatter_tol,
        max_scatter_iters=settings.radiation.max_scatter_iters,
        couple_tol=settings.coupling.couple_tol,
        couple_max=settings.coupling.couple_max,
        picard_tol=settings.coupling.picard_tol,
        picard_max=settings.coupling.picard_max,
        snapshot_times=tuple(settings.output.snapshot_times_s),
        snapshot_every=settings.output.snapshot_every_s,
        radiation_enabled=settings.radiation.enabled,
        steady_window=settings.output.steady_window,
        steady_eps=settings.output.steady_eps_K,
    )
