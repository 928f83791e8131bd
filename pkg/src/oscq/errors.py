"""Exception and warning types shared across the package."""


class OscqError(Exception):
    """Base class for all package errors."""


class ModelParameterError(OscqError):
    """Unknown parameter name or non-finite parameter value."""


class ModelDomainError(OscqError):
    """Model evaluation produced a non-finite value.

    Carries the offending state vector in ``state``.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class NewtonFailureError(OscqError):
    """Newton iteration for an implicit time step did not converge."""

    def __init__(self, message, time=None, iterate=None, residual=None):
        super().__init__(message)
        self.time = time
        self.iterate = iterate
        self.residual = residual


class SingularMatrixError(OscqError):
    """Singular iteration or step matrix: index/degeneracy diagnostic."""

    def __init__(self, message, step_index=None):
        super().__init__(message)
        self.step_index = step_index


class PssError(OscqError):
    """Base class for periodic-steady-state failures."""


class ShootingFailureError(PssError):
    """Newton shooting diverged or left its trust region."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConservativeSystemError(PssError):
    """Shooting Jacobian numerically singular: conservative or degenerate
    orbit family. Period detection should be used instead."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ConstantSolutionError(PssError):
    """The solver converged to an equilibrium, not an oscillation."""


class NoOscillationError(PssError):
    """No repeated section crossings found: no oscillation detected."""


class EigenFailureError(OscqError):
    """Eigenvalue iteration failed to converge (never silent)."""


class AnalysisError(OscqError):
    """Base class for companion-analysis failures."""


class TooFewCyclesError(AnalysisError):
    """Perturbation decayed below the noise floor in under three cycles;
    a larger perturbation magnitude is needed."""


class NoBalancePointError(AnalysisError):
    """Power-balance curves do not intersect on the requested grid."""


class PeriodDriftWarning(UserWarning):
    """Successive inter-crossing times differ beyond the drift tolerance."""


class NonSeparatedSpectrumWarning(UserWarning):
    """|lambda2| is too close to |lambda3| for power iteration; the full
    spectrum was used instead."""
