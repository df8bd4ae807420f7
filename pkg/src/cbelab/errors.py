"""Exception hierarchy shared across the package."""


class CbelabError(Exception):
    """Base class for all package-specific errors."""


class DomainError(CbelabError, ValueError):
    """An argument lies outside the mathematically admissible domain."""


class GridMismatchError(CbelabError, ValueError):
    """Two grid functions do not live on the same grid."""


class UnknownCaseError(CbelabError, KeyError):
    """Requested benchmark case id is not registered."""


class NoExactReferenceError(CbelabError, LookupError):
    """The case has no closed-form reference for the requested quantity."""


class NoOracleError(CbelabError, LookupError):
    """No hard-coded closed-form series term for this (case, method, order)."""


class StiffnessError(CbelabError, RuntimeError):
    """Adaptive stepper drove the step size below the underflow threshold."""


class DivergenceError(CbelabError, RuntimeError):
    """Non-finite values appeared in the integration state."""


class NumericalError(CbelabError, RuntimeError):
    """A numerical procedure produced a non-finite intermediate result."""
