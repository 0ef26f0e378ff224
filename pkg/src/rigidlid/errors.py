"""Exception types shared across the package."""


class RigidlidError(Exception):
    """Base class for all package-specific errors."""


class StateError(RigidlidError, ValueError):
    """Raised for thermodynamically inadmissible states (rho <= 0, p <= 0)."""


class TableauError(RigidlidError, ValueError):
    """Raised when a Butcher tableau violates a registry invariant."""


class SolverError(RigidlidError, RuntimeError):
    """Raised when a Krylov stage solve fails to converge.

    Attributes
    ----------
    residual : float
        Relative residual norm at the point of failure.
    iterations : int
        Inner iterations performed.
    """

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ConfigError(RigidlidError, ValueError):
    """Raised for malformed or semantically invalid run configurations."""


class RunAborted(RigidlidError, RuntimeError):
    """Raised when a time integration aborts mid-run.

    Carries the last successfully completed state so callers can checkpoint.
    """

    def __init__(self, message, last_state=None, time=None):
        super().__init__(message)
        self.last_state = last_state
        self.time = time
