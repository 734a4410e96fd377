"""Exception types shared across the package."""


class NewtonConvergenceError(RuntimeError):
    """Newton iteration failed to reach tolerance within max_iters.

    Carries the full residual-norm trace of the failed solve in
    ``residual_norms`` (one entry per evaluated iterate, including the
    initial guess).
    """

    def __init__(self, message: str, residual_norms: list[float]):
        super().__init__(message)
        self.residual_norms = residual_norms


class AdmissibilityError(ValueError):
    """A state left the admissible set (e.g. nonpositive density or pressure)."""


class ConfigurationError(ValueError):
    """Invalid experiment or scheme configuration."""
