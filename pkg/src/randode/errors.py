"""Exception types shared across the package."""


class RandodeError(Exception):
    """Base class for all package errors."""


class CatalogError(RandodeError):
    """Unknown problem, integrator, or noise-model name."""


class MeshError(RandodeError):
    """Horizon is not an integer multiple of the step size."""


class DivergenceError(RandodeError):
    """A vector-field or integrator evaluation produced a non-finite value."""


class StepSizeError(RandodeError):
    """Step size violates the implicit-method cap."""


class NonconvergenceError(RandodeError):
    """Implicit solve failed to reach the residual tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConfigError(RandodeError):
    """Invalid experiment configuration."""


class StatisticalPowerError(RandodeError):
    """Monte Carlo sample too small for the requested check."""
