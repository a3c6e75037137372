"""Exception types shared across the package."""


class RfmError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(RfmError, ValueError):
    """Operand shapes are inconsistent."""


class NonFiniteError(RfmError, ValueError):
    """An input or computed array contains NaN or Inf."""


class SingularSystemError(RfmError, RuntimeError):
    """The regularized kernel system is not numerically positive definite."""


class SolverResidualError(RfmError, RuntimeError):
    """A linear solve failed to reach the required residual bound."""
