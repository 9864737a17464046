"""Stabilized gradient iterations for dense and structured linear systems.

The stabilized step solves ``(I + gamma A^T A) x_{k+1} = (I - alpha A) x_k
+ alpha b + gamma A^T b``. For large ``gamma`` it converges in very few
iterations even when the plain gradient iteration diverges.
"""

from .analysis import (
    BoundParameters,
    FilterFactorTable,
    bound_parameters,
    convergence_factor,
    convergence_region_check,
    error_bound,
    filter_factors,
    gradient_iteration_matrix,
    naive_svd_solution,
    stabilized_iteration_matrix,
    svd_expansion_solve,
)
from .dense import (
    CholeskyFactor,
    SvdFactorization,
    cholesky_factor,
    cholesky_solve,
    condition_number,
    matvec,
    numerical_rank,
    spectral_norm,
    spectral_radius_estimate,
    svd,
)
from .errors import (
    DimensionMismatch,
    KernelSingularity,
    MissingExactSolution,
    NonConvergence,
    NonConvergenceWarning,
    NonPositiveCurvature,
    NotPositiveDefinite,
    NotSymmetric,
    StepUnderflow,
    ZeroMatrix,
)
from .problems import (
    KernelProblemSpec,
    Problem,
    beck_quadratic,
    discretize_fredholm,
    gravity,
    heat,
    identity,
    matrix_a1,
    matrix_a2,
    reaction_diffusion_2d,
    shaw,
)
from .solvers import (
    AbsoluteResidual,
    Backtracking,
    Constant,
    ExactLineSearch,
    GradientNorm,
    RelativeError,
    RelativeResidual,
    SolveReport,
    StopReason,
    SystemForm,
    build_stabilized_operator,
    gradient_solve,
    stabilized_solve,
)

__version__ = "0.1.0"
