"""Exception hierarchy shared across the package."""


class DPSError(Exception):
    """Base class for all package errors."""


class InstabilityError(DPSError, ValueError):
    """Offered load is at or above capacity (rho >= 1)."""


class SingularSystemError(DPSError, ArithmeticError):
    """The waiting-time linear system is numerically singular.

    Valid (stable, positive) inputs never produce this; seeing it means a bug
    or a degenerate instance slipped past validation.
    """


class BracketExhaustedError(DPSError):
    """A scalar minimizer pinned to an endpoint of its search bracket."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class ConvergenceError(DPSError):
    """An iterative solver hit its iteration cap without converging."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class QuadratureError(DPSError):
    """Numerical integration could not reach the requested tolerance."""


class HypothesisError(DPSError, ValueError):
    """Inputs violate an assumption that a bound relies on."""
