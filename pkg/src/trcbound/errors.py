"""Exception types shared across the package."""


class TrcboundError(Exception):
    """Base class for errors raised by this package."""


class DomainError(TrcboundError, ValueError):
    """Input outside the mathematical domain of an operation."""


class CapacityError(TrcboundError):
    """Exact enumeration would exceed the configured work budget."""


class SamplingError(TrcboundError):
    """Rejection sampling exhausted its attempt budget."""


class OptimizationError(TrcboundError):
    """Iterative maximization did not converge; carries the best iterate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConfigError(TrcboundError):
    """Malformed run configuration or channel file."""
