"""Exception hierarchy shared by all solvers."""


class CableRodError(Exception):
    """Base class for every error raised by this package."""


class QuadratureError(CableRodError, ValueError):
    pass


class ContractError(CableRodError, ValueError):
    """A documented precondition of an operation was violated."""


class DomainError(CableRodError, ValueError):
    pass


class ProfileError(CableRodError, ValueError):
    """A spacing or rigidity profile is not strictly positive on its domain."""


class ModeError(CableRodError, ValueError):
    """The actuation mode does not match what the model accepts."""


class PhysicalValidityError(CableRodError, ValueError):
    pass


class ConfigurationError(CableRodError, ValueError):
    pass


class SolverError(CableRodError, RuntimeError):
    """A numerical solver failed; ``diagnostics`` holds whatever it knew at failure."""

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.message = message
        self.diagnostics = diagnostics

    def __str__(self):
        if not self.diagnostics:
            return self.message
        extra = ", ".join(f"{k}={v!r}" for k, v in self.diagnostics.items())
        return f"{self.message} ({extra})"


class BracketError(SolverError):
    pass


class DivergenceError(SolverError):
    pass


class NonconvergenceError(SolverError):
    pass


class OracleError(SolverError):
    pass
