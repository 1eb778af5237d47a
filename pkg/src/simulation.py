"""Time loop coupling the radiation sweep and the implicit conduction step."""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from conduction import (
    BoundarySchedule,
    Grid1D,
    ThermalState,
    advance,
    boundary_temperature,
    conductive_flux,
    energy_residual,
)
from errors import ConfigError, ConvergenceError, InputError
from material import MaterialModel
from radiation import (
    RadiativeBoundary,
    SpectralBand,
    build_quadrature,
    radiative_flux,
    radiative_source,
    sweep_intensity,
    validate_bands,
)

logger = logging.getLogger(__name__)

PROFILE_COLUMNS = ["time_s", "x_m", "temperature_K", "q_cond_W_m2", "q_rad_W_m2", "q_total_W_m2"]
DATASET_COLUMNS = ["time_s", "x_m", "temperature_K", "q_rad_W_m2", "q_cond_W_m2"]


@dataclass(frozen=True)
class SimulationConfig:
    grid: Grid1D
    material: MaterialModel
    bands: Tuple[SpectralBand, ...]
    schedule: BoundarySchedule
    dt: float
    t_end: float
    n_ordinates: int = 8
    n_sub: int = 8
    scatter_tol: float = 1e-8
    max_scatter_iters: int = 200
    couple_tol: float = 1e-6
    couple_max: int = 20
    picard_tol: float = 1e-8
    picard_max: int = 50
    snapshot_times: Tuple[float, ...] = (1.0, 5.0, 10.0, 50.0, 100.0)
    snapshot_every: Optional[float] = None
    radiation_enabled: bool = True
    steady_window: int = 10
    steady_eps: float = 0.05

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"time.dt_s={self.dt!r} must be positive")
        if self.t_end < self.dt:
            raise ConfigError(f"time.t_end_s={self.t_end!r} must be at least dt={self.dt!r}")
        if not self.couple_tol > 0:
            raise ConfigError(f"coupling.couple_tol={self.couple_tol!r} must be positive")
        for t in self.snapshot_times:
            if not 0.0 <= t <= self.t_end:
                raise ConfigError(f"snapshot time {t!r} s outside [0, {self.t_end}]")
        if self.snapshot_every is not None and not self.snapshot_every > 0:
            raise ConfigError(f"output.snapshot_every_s={self.snapshot_every!r} must be positive")
        validate_bands(self.bands)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def snapshot_steps(self) -> List[int]:
        """Step indices nearest to the requested snapshot times, strictly increasing."""
        steps = {min(self.n_steps, int(round(t / self.dt))) for t in self.snapshot_times}
        if self.snapshot_every is not None:
            stride = max(1, int(round(self.snapshot_every / self.dt)))
            steps.update(range(0, self.n_steps + 1, stride))
        return sorted(steps)


@dataclass(frozen=True)
class Snapshot:
    t: float
    T: np.ndarray
    q_c: np.ndarray
    q_r: np.ndarray
    q_total: np.ndarray


@dataclass
class SimulationResult:
    x: np.ndarray
    snapshots: List[Snapshot]
    steady_state_time: Optional[float]
    diagnostics: Dict[str, Any] = field(default_factory=dict)


class _RadiationCoupler:
    """Radiative flux and source for a temperature profile under a fixed config."""

    def __init__(self, config: SimulationConfig):
        self.config = config
        self.ordinates = build_quadrature(config.n_ordinates)
        self.max_scatter_iterations = 0

    def __call__(self, T: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        config = self.config
        bc = RadiativeBoundary(T_front=T[0], T_back=T[-1])
        intensity = sweep_intensity(
            config.grid,
            config.bands,
            self.ordinates,
            T,
            bc,
            scatter_tol=config.scatter_tol,
            max_scatter_iters=config.max_scatter_iters,
            n_sub=config.n_sub,
        )
        self.max_scatter_iterations = max(self.max_scatter_iterations, intensity.scatter_iterations)
        q_r = radiative_flux(intensity, self.ordinates, config.bands)
        return q_r, radiative_source(q_r, config.grid)


def run_simulation(config: SimulationConfig) -> SimulationResult:
    grid = config.grid
    material = config.material
    sched = config.schedule
    n_steps = config.n_steps
    snapshot_steps = set(config.snapshot_steps())
    coupler = _RadiationCoupler(config) if config.radiation_enabled else None
    zeros = np.zeros(grid.n_nodes)

    initial = np.full(grid.n_nodes, sched.T_E)
    initial[0] = boundary_temperature(sched, 0.0)
    state = ThermalState(0.0, initial)

    def snapshot(state: ThermalState) -> Snapshot:
        q_r = coupler(state.T)[0] if coupler else zeros.copy()
        q_c = conductive_flux(material, state, grid)
        return Snapshot(t=state.t, T=state.T.copy(), q_c=q_c, q_r=q_r, q_total=q_c + q_r)

    snapshots: List[Snapshot] = [snapshot(state)] if 0 in snapshot_steps else []
    history: List[ThermalState] = [state]
    diagnostics = {
        "steps": n_steps,
        "picard_iterations_max": 0,
        "coupling_iterations_max": 0,
        "coupling_unconverged_steps": 0,
        "max_energy_residual": 0.0,
    }
    progress_every = max(1, n_steps // 10)

    logger.info(
        "simulation start: %d nodes, dt=%g s, t_end=%g s, radiation %s",
        grid.n_nodes, config.dt, config.t_end, "on" if coupler else "off",
    )
    for step in range(1, n_steps + 1):
        t_new = step * config.dt
        try:
            if coupler is None:
                S_r = zeros
                result = advance(state, S_r, material, grid, sched, config.dt,
                                 config.picard_tol, config.picard_max, t_new=t_new)
                coupling_iterations = 1
            else:
                T_iterate = state.T
                for coupling_iterations in range(1, config.couple_max + 1):
                    S_r = coupler(T_iterate)[1]
                    result = advance(state, S_r, material, grid, sched, config.dt,
                                     config.picard_tol, config.picard_max, t_new=t_new)
                    change = float(np.max(np.abs(result.state.T - T_iterate)))
                    T_iterate = result.state.T
                    if change < config.couple_tol:
                        break
                else:
                    diagnostics["coupling_unconverged_steps"] += 1
                    logger.warning("step %d: coupling stopped at %d iterations, change %.3e K",
                                   step, config.couple_max, change)
        except ConvergenceError as e:
            e.step = step
            logger.error(f"simulation aborted at step {step}: {str(e)}")
            raise

        diagnostics["picard_iterations_max"] = max(diagnostics["picard_iterations_max"], result.picard_iterations)
        diagnostics["coupling_iterations_max"] = max(diagnostics["coupling_iterations_max"], coupling_iterations)
        diagnostics["max_energy_residual"] = max(
            diagnostics["max_energy_residual"],
            energy_residual(material, grid, state.T, result.state.T, S_r, config.dt),
        )

        state = result.state
        history.append(state)
        if step in snapshot_steps:
            snapshots.append(snapshot(state))
        if step % progress_every == 0:
            logger.info("t=%g s (%d/%d steps), front %.3f K", t_new, step, n_steps, state.T[0])

    if coupler is not None:
        diagnostics["scatter_iterations_max"] = coupler.max_scatter_iterations
    steady = detect_steady_state(history, config.steady_window, config.steady_eps)
    logger.info("simulation done: steady state %s", f"at t={steady} s" if steady is not None else "not reached")
    return SimulationResult(x=grid.x, snapshots=snapshots, steady_state_time=steady, diagnostics=diagnostics)


def detect_steady_state(history: Sequence[ThermalState], window: int, eps: float) -> Optional[float]:
    """Earliest time after which every ``window``-long stretch of the history
    changes each node by less than ``eps`` (max minus min); None if never."""
    if window < 2:
        raise ConfigError(f"steady-state window={window} must be at least 2")
    if len(history) < window:
        return None
    temperatures = np.stack([state.T for state in history])
    windows = np.lib.stride_tricks.sliding_window_view(temperatures, window, axis=0)
    spans = np.max(np.ptp(windows, axis=-1), axis=-1)
    unsteady = np.flatnonzero(spans >= eps)
    if unsteady.size == 0:
        return history[0].t
    first = unsteady[-1] + 1
    if first >= len(spans):
        return None
    return history[first].t


def emit_dataset(result: SimulationResult) -> Iterator[Tuple[float, float, float, float, float]]:
    """Rows (t, x, T, q_r, q_c), one per snapshot and node, in DATASET_COLUMNS order."""
    if not result.snapshots:
        raise InputError("simulation result has no snapshots")
    for snap in result.snapshots:
        for i, x in enumerate(result.x):
            yield (snap.t, float(x), float(snap.T[i]), float(snap.q_r[i]), float(snap.q_c[i]))


def dataset_frame(result: SimulationResult) -> pd.DataFrame:
    return pd.DataFrame(list(emit_dataset(result)), columns=DATASET_COLUMNS)


def profile_frame(result: SimulationResult) -> pd.DataFrame:
    if not result.snapshots:
        raise InputError("simulation result has no snapshots")
    blocks = [
        pd.DataFrame({
            "time_s": np.full(len(result.x), snap.t),
            "x_m": result.x,
            "temperature_K": snap.T,
            "q_cond_W_m2": snap.q_c,
            "q_rad_W_m2": snap.q_r,
            "q_total_W_m2": snap.q_total,
        })
        for snap in result.snapshots
    ]
    return pd.concat(blocks, ignore_index=True)[PROFILE_COLUMNS]
