"""Exception and warning types shared across the package."""


class VofdeError(Exception):
    """Base class for all package errors."""


class BranchCutError(VofdeError, ValueError):
    """A complex argument lies on the branch cut of a multivalued kernel."""


class PoleError(VofdeError, ZeroDivisionError):
    """Evaluation requested at a pole."""


class InfeasiblePlanError(VofdeError, ValueError):
    """No admissible parameter set exists for the requested weight accuracy."""


class InversionError(VofdeError, ArithmeticError):
    """Numerical Laplace inversion produced an unreliable value."""


class ContourError(VofdeError, ValueError):
    """A contour does not leave every singularity of the transform on its left."""


class SolverDivergenceError(VofdeError, ArithmeticError):
    """The implicit step of the time stepper failed to converge.

    Attributes
    ----------
    step : int
        Index ``n`` of the grid node being computed.
    residual : float
        Last residual norm observed.
    """

    def __init__(self, message, step=None, residual=None):
        super().__init__(message)
        self.step = step
        self.residual = residual


class ConvergenceWarning(UserWarning):
    """A self-consistency check on a numerical approximation failed."""


class PlanWarning(UserWarning):
    """The weight plan had to relax the requested tolerance."""
