"""Exception types shared across the package.

NumericsError and its subclasses map to CLI exit code 3; ConfigError maps
to exit code 1.
"""


class NumericsError(RuntimeError):
    """A numerical procedure failed to reach its accuracy contract."""


class QuadratureError(NumericsError):
    """Adaptive quadrature did not converge to the requested tolerance."""


class ConvergenceError(NumericsError):
    """Step refinement of a solver did not converge."""


class UnphysicalStateError(NumericsError):
    """A covariance matrix violates the uncertainty relation."""


class NearResonanceError(ValueError):
    """Closed-form case-model expressions are singular near resonance."""


class ConfigError(ValueError):
    """A run configuration file is malformed or incomplete."""
