"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class CapExceededError(ValueError):
    """Request exceeds a configured table or sieve cap."""


class ConvergenceError(ArithmeticError):
    """An iterative or series evaluation could not reach its target."""


class ResolutionError(ArithmeticError):
    """A tabulation grid is too coarse for the requested accuracy."""


class OutOfRangeError(ValueError):
    """Query lies outside a tabulated range."""
