"""Exception hierarchy shared by every module of the package."""


class ReservoirError(Exception):
    """Base class for all package errors."""


class DomainError(ReservoirError, ValueError):
    """An argument lies outside the domain of the operation."""


class UnsupportedOperationError(ReservoirError, TypeError):
    """The operation is not defined for this kind of spectral density."""


class QuadratureError(ReservoirError, ArithmeticError):
    """A numerical integral failed to converge."""


class ConfigurationError(ReservoirError, ValueError):
    """Solver or run configuration is invalid (e.g. a step that is too coarse)."""


class DivergenceError(ReservoirError, ArithmeticError):
    """The amplitude solver left the physical region |c| <= 1."""

    def __init__(self, step: int, value: float):
        super().__init__(f"|c| = {value:.6g} exceeds 1 + 1e-3 at step {step}")
        self.step = step
        self.value = value


class InvalidStateError(ReservoirError, ValueError):
    """A density matrix or Bloch vector is unphysical."""


class BracketError(ReservoirError, RuntimeError):
    """Root bracketing failed."""


class RangeError(ReservoirError, ValueError):
    """Requested evaluation lies beyond the supported numerical range."""
