"""Exception types raised by the stabgrad kernels."""

import numpy as np


class DimensionMismatch(ValueError):
    """Operand shapes do not agree."""


class NotSymmetric(ValueError):
    """A symmetric matrix was required."""


class NotPositiveDefinite(np.linalg.LinAlgError):
    """A Cholesky pivot was not strictly positive."""


class NonConvergence(RuntimeError):
    """An iterative kernel ran out of its iteration budget."""


class NonConvergenceWarning(RuntimeWarning):
    """Diagnostic estimate returned before meeting its tolerance."""


class ZeroMatrix(ValueError):
    """The largest singular value is zero."""


class NonPositiveCurvature(ValueError):
    """The quadratic form g'Ag is not positive along the search direction."""


class StepUnderflow(RuntimeError):
    """Backtracking shrank the step below 1e-300 without sufficient decrease."""


class MissingExactSolution(ValueError):
    """A stopping rule needs the exact solution but none was given."""


class KernelSingularity(ValueError):
    """A kernel evaluation returned a non-finite value."""
