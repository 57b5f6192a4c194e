"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class ConvergenceError(RuntimeError):
    """A quadrature or root refinement did not reach its tolerance."""


class IntegrationError(RuntimeError):
    """The ODE integrator failed (step underflow, missing event, ...)."""


class ConsistencyError(RuntimeError):
    """Two routes to the same quantity disagree beyond tolerance."""
