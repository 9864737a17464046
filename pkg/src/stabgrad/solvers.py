"""Gradient and stabilized gradient iterations for ``A x = b``.

The stabilized iteration solves

    (I + gamma A^T A) x_{k+1} = (I - alpha_k A) x_k + alpha_k b + gamma A^T b

at every step. The left-hand matrix does not depend on the stepsize, so it is
factored once per solve.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .dense import cholesky_factor, cholesky_solve
from .errors import (
    DimensionMismatch,
    MissingExactSolution,
    NonPositiveCurvature,
    StepUnderflow,
)

DIVERGENCE_FACTOR = 1e12


# -- stepsize strategies -----------------------------------------------------

@dataclass(frozen=True)
class Constant:
    alpha: float

    def __post_init__(self):
        if not np.isfinite(self.alpha):
            raise ValueError("alpha must be finite")


@dataclass(frozen=True)
class ExactLineSearch:
    pass


@dataclass(frozen=True)
class Backtracking:
    s: float = 2.0
    slope_coeff: float = 0.25
    shrink: float = 0.5

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError("s must be positive")
        if not 0 < self.slope_coeff < 1:
            raise ValueError("slope_coeff must lie in (0, 1)")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")


# -- stopping rules ----------------------------------------------------------

def _check_eps(eps):
    if not eps > 0:
        raise ValueError("eps must be positive")


@dataclass(frozen=True)
class RelativeResidual:
    """``||b - A x|| / ||b - A x0|| <= eps``."""

    eps: float

    def __post_init__(self):
        _check_eps(self.eps)


@dataclass(frozen=True, eq=False)
class RelativeError:
    """``||x* - x|| / ||x*|| < eps`` (absolute error when ``x* = 0``)."""

    eps: float
    x_star: np.ndarray | None = None

    def __post_init__(self):
        _check_eps(self.eps)


@dataclass(frozen=True)
class GradientNorm:
    """``||2 (A x + b)|| <= eps``, the gradient of ``<Ax, x> + 2 <b, x>``."""

    eps: float

    def __post_init__(self):
        _check_eps(self.eps)


@dataclass(frozen=True)
class AbsoluteResidual:
    """``||A x - b|| <= eps``."""

    eps: float

    def __post_init__(self):
        _check_eps(self.eps)


class SystemForm(Enum):
    """Which function the gradient iteration descends.

    LINEAR steps along ``A x - b``. BECK steps along ``2 (A x + b)``, the
    gradient of ``f(x) = <Ax, x> + 2 <b, x>``.
    """

    LINEAR = "linear"
    BECK = "beck"


class StopReason(Enum):
    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterations"
    DIVERGED = "Diverged"


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Outcome of an iterative solve.

    Histories are indexed by iteration, entry 0 being the initial iterate.
    `stepsizes` holds the stepsize used at each of the `iterations` steps.
    """

    iterations: int
    final_x: np.ndarray
    residual_history: np.ndarray
    error_history: np.ndarray | None
    stop_reason: StopReason
    stepsizes: np.ndarray

    @property
    def final_residual(self):
        return float(self.residual_history[-1])

    @property
    def final_error(self):
        return None if self.error_history is None else float(self.error_history[-1])


def _exact_solution(rule, x_star):
    ref = getattr(rule, "x_star", None)
    ref = x_star if ref is None else ref
    return None if ref is None else np.asarray(ref, dtype=float)


def _rule_holds(rule, ax, b, x, r0_norm, x_star):
    if isinstance(rule, RelativeResidual):
        if r0_norm == 0.0:
            return True
        return np.linalg.norm(b - ax) / r0_norm <= rule.eps
    if isinstance(rule, RelativeError):
        if x_star is None:
            raise MissingExactSolution("RelativeError needs the exact solution")
        ref = np.linalg.norm(x_star)
        err = np.linalg.norm(x_star - x)
        return (err / ref if ref > 0 else err) < rule.eps
    if isinstance(rule, GradientNorm):
        return np.linalg.norm(2.0 * (ax + b)) <= rule.eps
    if isinstance(rule, AbsoluteResidual):
        return np.linalg.norm(ax - b) <= rule.eps
    raise TypeError(f"unknown stopping rule {rule!r}")


def evaluate_stop(rule, a, b, x, x0, x_star=None):
    """Evaluate a stopping rule at `x` for a solve started from `x0`.

    Raises
    ------
    MissingExactSolution
        For RelativeError without an exact solution.
    """
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    r0 = np.linalg.norm(b - a @ np.asarray(x0, dtype=float))
    return bool(_rule_holds(rule, a @ x, b, x, r0, _exact_solution(rule, x_star)))


# -- stepsizes ---------------------------------------------------------------

def exact_line_stepsize(a, g):
    """Exact line search stepsize ``||g||^2 / (2 g^T A g)``.

    Raises
    ------
    NonPositiveCurvature
        If ``g^T A g <= 0``.
    """
    g = np.asarray(g, dtype=float)
    curvature = g @ (a @ g)
    if not curvature > 0:
        raise NonPositiveCurvature(f"g'Ag = {curvature:.3e}")
    return float((g @ g) / (2.0 * curvature))


def backtracking_stepsize(f, grad, x, s=2.0, slope_coeff=0.25, shrink=0.5):
    """Armijo backtracking along ``-grad``.

    Returns the first ``t = s * shrink**j`` with
    ``f(x - t grad) <= f(x) - slope_coeff * t * ||grad||^2``.
    """
    grad = np.asarray(grad, dtype=float)
    fx = f(x)
    slope = slope_coeff * (grad @ grad)
    t = s
    while f(x - t * grad) > fx - t * slope:
        t *= shrink
        if t < 1e-300:
            raise StepUnderflow("backtracking step underflowed")
    return t


def quadratic(a, b, sign=1.0):
    """``x -> <Ax, x> + 2 sign <b, x>``."""
    return lambda x: float(x @ (a @ x) + 2.0 * sign * (b @ x))


def _direction_and_objective(a, b, ax, mode):
    """Search direction and the objective it descends."""
    if mode is SystemForm.BECK:
        return 2.0 * (ax + b), quadratic(a, b, 1.0)
    # LINEAR: the step is alpha (A x - b); backtracking measures progress on
    # <Ax, x> - 2 <b, x> along its gradient 2 (A x - b)
    return ax - b, quadratic(a, b, -1.0)


def _stepsize(step, a, x, direction, objective, mode):
    """Stepsize for ``x - alpha * direction``, or None at a stationary point."""
    if isinstance(step, Constant):
        return step.alpha
    if not np.any(direction):
        return None
    if isinstance(step, ExactLineSearch):
        return exact_line_stepsize(a, direction)
    if isinstance(step, Backtracking):
        grad = direction if mode is SystemForm.BECK else 2.0 * direction
        return backtracking_stepsize(objective, grad, x, step.s, step.slope_coeff, step.shrink)
    raise TypeError(f"unknown stepsize strategy {step!r}")


# -- shared driver -----------------------------------------------------------

def _check_system(a, b, x0):
    b = np.asarray(b, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    rows, cols = a.shape
    if rows != cols:
        raise DimensionMismatch(f"matrix must be square, got {a.shape}")
    if b.shape != (rows,) or x0.shape != (cols,):
        raise DimensionMismatch(f"matrix {a.shape}, b {b.shape}, x0 {x0.shape}")
    return b, x0


def _iterate(a, b, x0, stop, k_max, x_star, update, mode):
    """Run ``x <- update(x, ax)`` until `stop`, `k_max` or divergence.

    `update` returns the next iterate and its stepsize, or ``(None, None)``
    when the search direction vanished.
    """
    x_star = _exact_solution(stop, x_star)
    x = x0.copy()
    ax = a @ x
    r0 = float(np.linalg.norm(ax - b))
    residuals = [r0]
    errors = None if x_star is None else [float(np.linalg.norm(x - x_star))]
    steps = []
    reason = StopReason.MAX_ITERATIONS
    k = 0
    while True:
        if _rule_holds(stop, ax, b, x, r0, x_star):
            reason = StopReason.CONVERGED
            break
        if k >= k_max:
            break
        try:
            x_next, alpha = update(x, ax)
        except NonPositiveCurvature:
            reason = StopReason.DIVERGED
            break
        if x_next is None:
            # vanishing direction: x is stationary
            reason = StopReason.CONVERGED
            break
        x = x_next
        ax = a @ x
        k += 1
        steps.append(alpha)
        r = float(np.linalg.norm(ax - b))
        residuals.append(r)
        if errors is not None:
            errors.append(float(np.linalg.norm(x - x_star)))
        if not np.isfinite(r) or (r0 > 0 and r > DIVERGENCE_FACTOR * r0):
            reason = StopReason.DIVERGED
            break
    return SolveReport(
        iterations=k,
        final_x=x,
        residual_history=np.array(residuals),
        error_history=None if errors is None else np.array(errors),
        stop_reason=reason,
        stepsizes=np.array(steps, dtype=float),
    )


def gradient_solve(a, b, x0, step, stop, k_max, mode=SystemForm.LINEAR, x_star=None):
    """Classical gradient iteration ``x <- x - alpha_k d_k``.

    ``d_k = A x - b`` in LINEAR mode and ``2 (A x + b)`` in BECK mode.
    A solve is declared diverged once the residual exceeds 1e12 times its
    initial value.

    Parameters
    ----------
    a : (n, n) array or operator supporting ``@``
    b, x0 : (n,) array_like
    step : Constant, ExactLineSearch or Backtracking
    stop : RelativeResidual, RelativeError, GradientNorm or AbsoluteResidual
    k_max : int
    mode : SystemForm
    x_star : (n,) array_like, optional
        Exact solution; enables the error history.

    Returns
    -------
    SolveReport
    """
    mode = SystemForm(mode)
    b, x0 = _check_system(a, b, x0)

    def update(x, ax):
        direction, objective = _direction_and_objective(a, b, ax, mode)
        alpha = _stepsize(step, a, x, direction, objective, mode)
        if alpha is None:
            return None, None
        return x - alpha * direction, alpha

    return _iterate(a, b, x0, stop, k_max, x_star, update, mode)


@dataclass(frozen=True, eq=False)
class StabilizedOperator:
    """Pieces of ``M x_{k+1} = N x_k + c`` for fixed ``gamma`` and ``alpha``.

    ``M = I + gamma A^T A`` is held factored (`m_factor` for dense matrices,
    `solve_m` in every case). `n_matrix` and `c` are ``I - alpha A`` and
    ``alpha b + gamma A^T b``.
    """

    a: object
    gamma: float
    alpha: float
    c: np.ndarray
    gamma_atb: np.ndarray
    solve_m: Callable
    m_factor: object = None

    @property
    def n_matrix(self):
        a = np.asarray(self.a if isinstance(self.a, np.ndarray) else self.a.todense())
        return np.eye(a.shape[0]) - self.alpha * a

    def apply_n(self, x, alpha=None):
        """``(I - alpha A) x`` without forming the matrix."""
        alpha = self.alpha if alpha is None else alpha
        return x - alpha * (self.a @ x)

    def step(self, x, b, alpha=None):
        """One stabilized update with stepsize `alpha` (default: the stored one)."""
        if alpha is None:
            return self.solve_m(self.apply_n(x) + self.c)
        return self.solve_m(self.apply_n(x, alpha) + alpha * b + self.gamma_atb)


def build_stabilized_operator(a, b, gamma, alpha):
    """Assemble and factor ``M = I + gamma A^T A``; form ``c``.

    ``A^T A`` is symmetrized explicitly before the Cholesky factorization.
    Structured operators that provide ``shifted_normal_solver`` are solved
    through it instead.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    b = np.asarray(b, dtype=float)
    gamma_atb = gamma * (a.T @ b)
    c = alpha * b + gamma_atb
    if isinstance(a, np.ndarray):
        ata = a.T @ a
        m = np.eye(a.shape[0]) + gamma * (0.5 * (ata + ata.T))
        factor = cholesky_factor(m)
        return StabilizedOperator(a, float(gamma), float(alpha), c, gamma_atb,
                                  lambda r: cholesky_solve(factor, r), factor)
    return StabilizedOperator(a, float(gamma), float(alpha), c, gamma_atb,
                              a.shifted_normal_solver(gamma))


def stabilized_solve(a, b, x0, gamma, step, stop, k_max, x_star=None, operator=None):
    """Stabilized gradient iteration ``x <- M^{-1} (N_k x + c_k)``.

    With a non-constant stepsize the stepsize is recomputed each iteration
    from the direction ``A x - b``; ``M`` is factored once and reused.
    A prebuilt `operator` for the same ``a``, ``b`` and ``gamma`` may be
    passed to skip the factorization.

    Returns
    -------
    SolveReport
    """
    b, x0 = _check_system(a, b, x0)
    alpha0 = step.alpha if isinstance(step, Constant) else 0.0
    op = operator or build_stabilized_operator(a, b, gamma, alpha0)

    def update(x, ax):
        if isinstance(step, Constant):
            return op.step(x, b, step.alpha), step.alpha
        direction, objective = _direction_and_objective(a, b, ax, SystemForm.LINEAR)
        alpha = _stepsize(step, a, x, direction, objective, SystemForm.LINEAR)
        if alpha is None:
            return None, None
        return op.step(x, b, alpha), alpha

    return _iterate(a, b, x0, stop, k_max, x_star, update, SystemForm.LINEAR)
