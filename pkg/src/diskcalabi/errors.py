"""Exception types shared across the package."""


class DiskCalabiError(Exception):
    """Base class for all package-specific errors."""


class DomainError(DiskCalabiError, ValueError):
    """Input lies outside the mathematical domain of an operation."""


class PreconditionError(DiskCalabiError, ValueError):
    """A documented precondition of an operation does not hold."""


class InvalidProfileError(DiskCalabiError, ValueError):
    """A twist or smoothing profile violates its structural invariants."""


class InvalidInputError(DiskCalabiError, ValueError):
    """Malformed input document (JSON parse failure or schema violation)."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(message)
        self.path = path


class NumericError(DiskCalabiError, RuntimeError):
    """An iteration or quadrature failed to converge within its budget.

    Carries the partial estimate so callers can report it.
    """

    def __init__(self, message: str, estimate=None, error_estimate=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate


class ConsistencyError(DiskCalabiError, RuntimeError):
    """Two supposedly equivalent computations disagree.

    Usually signals a resonance or precision problem in floor arithmetic.
    """


class ResonanceError(DiskCalabiError, ValueError):
    """A floor/ceiling argument is too close to an integer to be trusted."""


class BudgetError(DiskCalabiError, RuntimeError):
    """A configured resource limit would be exceeded."""
