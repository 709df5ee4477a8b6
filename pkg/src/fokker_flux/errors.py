"""Exception types raised by the solvers and the CLI."""


class FokkerFluxError(Exception):
    """Base class for all package errors."""


class InvalidGridError(FokkerFluxError):
    """Grid construction parameters are invalid."""


class ShapeError(FokkerFluxError):
    """Tabulated data does not match the grid."""


class InvalidModelError(FokkerFluxError):
    """Model parameters violate the standing assumptions."""


class InvalidInitialError(FokkerFluxError):
    """Initial data violates the model's positivity/box constraint."""


class StabilityError(FokkerFluxError):
    """Explicit time step exceeds the stability bound."""


class DivergenceError(FokkerFluxError):
    """Non-finite values appeared during time stepping."""


class StepFailureError(FokkerFluxError):
    """Implicit step did not converge.

    Carries the last Newton residual norm and, when raised from a run,
    the physical time of the failing step.
    """

    def __init__(self, message: str, residual: float, time: float | None = None):
        super().__init__(message)
        self.residual = residual
        self.time = time


class EntropyDomainError(FokkerFluxError):
    """Field values outside the domain of the requested entropy."""


class UndefinedConstantError(FokkerFluxError):
    """An inequality constant is undefined for the given fields."""


class FitError(FokkerFluxError):
    """Exponential-rate fit preconditions are not met."""


class RootNotFoundError(FokkerFluxError):
    """No sign change found in the root scan range."""


class IterationError(FokkerFluxError):
    """An iterative solver stagnated before reaching its tolerance."""


class ConfigError(FokkerFluxError):
    """Run configuration failed validation."""
