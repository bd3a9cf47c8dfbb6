"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class ConfigurationError(ValueError):
    """A solver or simulation configuration is rejected before any work starts."""


class QuadratureError(RuntimeError):
    """Numerical integration did not reach the requested tolerance."""

    def __init__(self, message, achieved=None, requested=None):
        super().__init__(message)
        self.achieved = achieved
        self.requested = requested


class MonteCarloError(RuntimeError):
    """A Monte Carlo run produced too many unusable samples."""
