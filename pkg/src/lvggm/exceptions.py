"""Exception types shared across the package."""


class LvggmError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(LvggmError, ValueError):
    """Matrix shapes are inconsistent with what an operation requires."""


class ContractError(LvggmError, ValueError):
    """An input violates a documented precondition (asymmetry, NaN, ...)."""


class FactorizationError(LvggmError, ArithmeticError):
    """A matrix factorization failed (non-PD input, SVD breakdown).

    For Cholesky failures ``pivot`` holds the 1-based index of the first
    non-positive pivot, as reported by LAPACK.
    """

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class RankDeficiencyError(LvggmError, ValueError):
    """A full-rank matrix was required but a rank-deficient one was given."""


class InfeasibleHidingError(LvggmError, ValueError):
    """Fewer connected vertices than the number of variables to hide."""


class UndefinedPowerError(LvggmError, ValueError):
    """Power is undefined because the true edge set is empty."""


class NumericError(LvggmError, ArithmeticError):
    """A numeric routine failed to produce a usable result."""
