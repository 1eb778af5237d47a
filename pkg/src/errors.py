"""Exception hierarchy shared by the solver, the surrogate and the cli."""

from typing import Any, Optional


class ThermofluxError(Exception):
    """Base class for every error raised by thermoflux."""


class DomainError(ThermofluxError, ValueError):
    """A physical input lies outside the domain an operation accepts."""


class ThetaRangeError(DomainError):
    """A transformed temperature lies outside the image of the Kirchhoff map."""


class ConfigError(ThermofluxError, ValueError):
    """Invalid configuration or data that cannot be configured around."""


class CheckpointFormatError(ConfigError):
    pass


class GridError(ThermofluxError, ValueError):
    pass


class DimensionError(ThermofluxError, ValueError):
    pass


class InputError(ThermofluxError, ValueError):
    pass


class SizeError(ThermofluxError, ValueError):
    pass


class RocError(ThermofluxError, ValueError):
    """ROC analysis is undefined; ``report`` holds the confusion counts."""

    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report


class ConvergenceError(ThermofluxError, RuntimeError):
    """An iteration did not reach its tolerance."""

    def __init__(
        self,
        message: str,
        residual: float,
        iterations: Optional[int] = None,
        step: Optional[int] = None,
    ):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.step = step

    def __str__(self) -> str:
        text = super().__str__()
        if self.step is not None:
            text = f"{text} (step {self.step})"
        return f"{text}; residual={self.residual:.3e}"


class TrainingDivergedError(ThermofluxError, RuntimeError):
    def __init__(self, message: str, epoch: int):
        super().__init__(message)
        self.epoch = epoch


class SolverError(ThermofluxError, RuntimeError):
    """Internal numerical failure (e.g. a zero pivot)."""
