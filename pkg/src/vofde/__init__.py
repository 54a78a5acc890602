"""Variable-order fractional relaxation and differential equations with an
exponential order transition, solved by Grünwald-Letnikov convolution
quadrature with FFT-computed weights and checked against Laplace inversion."""

from .analysis import (
    RelaxationSpec,
    SingularityScan,
    find_singularities,
    reference_relaxation,
    scan_singularities,
    sonine_convolution,
    transform_H,
)
from .errors import (
    BranchCutError,
    ContourError,
    ConvergenceWarning,
    InfeasiblePlanError,
    InversionError,
    PlanWarning,
    PoleError,
    SolverDivergenceError,
    VofdeError,
)
from .laplace_inversion import Contour, ContourSpec, invert, kernel_phi, kernel_psi
from .mittag_leffler import ml_series, relaxation_co, relaxation_transform
from .solver import StepSolverOptions, Trajectory, VofdeProblem, eoc, preset_problem, solve_co_gl, solve_gl
from .transition import ExponentialTransition, OrderTransition, phi_hat, psi_hat, psi_hat_h
from .weights import WeightPlan, WeightTable, co_weights, compute_weights, plan_weights

__version__ = "0.1.0"
