import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stabgrad import (
    AbsoluteResidual,
    Backtracking,
    Constant,
    DimensionMismatch,
    ExactLineSearch,
    GradientNorm,
    MissingExactSolution,
    NonPositiveCurvature,
    RelativeError,
    RelativeResidual,
    StopReason,
    SystemForm,
    beck_quadratic,
    build_stabilized_operator,
    gradient_solve,
    matrix_a1,
    matrix_a2,
    stabilized_solve,
    svd,
)
from stabgrad.errors import StepUnderflow
from stabgrad.solvers import backtracking_stepsize, evaluate_stop, exact_line_stepsize, quadratic

from conftest import random_nonsingular, roundoff_floor


def _brute_backtracking(f, grad, x, s, c, beta):
    # independent oracle: enumerate t = s * beta**j directly
    g2 = float(np.dot(grad, grad))
    for j in range(2000):
        t = s * beta**j
        if f(x - t * grad) <= f(x) - c * t * g2:
            return t
    raise AssertionError("no step found")


# -- strategies and rules ----------------------------------------------------

def test_strategy_validation():
    with pytest.raises(ValueError):
        Constant(np.inf)
    Constant(-3.0)  # negative stepsizes are allowed
    for bad in [dict(s=0), dict(slope_coeff=1.0), dict(shrink=0.0)]:
        with pytest.raises(ValueError):
            Backtracking(**bad)
    for rule in (RelativeResidual, RelativeError, GradientNorm, AbsoluteResidual):
        with pytest.raises(ValueError):
            rule(0.0)


def test_stop_relative_error_at_solution():
    p = matrix_a1()
    assert evaluate_stop(RelativeError(1e-5), p.a, p.b, p.x_star, np.zeros(4), p.x_star)


def test_stop_relative_residual_zero_initial_residual():
    a = np.eye(2)
    b = np.array([1.0, 2.0])
    assert evaluate_stop(RelativeResidual(1e-5), a, b, np.zeros(2), b)


def test_stop_gradient_norm_example():
    a = np.diag([1.0, 2.0])
    rule = GradientNorm(1e-5)
    assert evaluate_stop(rule, a, np.zeros(2), np.array([1e-6, 0.0]), np.ones(2))
    assert not evaluate_stop(rule, a, np.zeros(2), np.array([1e-5, 0.0]), np.ones(2))


def test_stop_absolute_residual_is_distinct_from_gradient_norm():
    a = np.eye(1)
    b = np.array([1.0])
    x = np.array([1.0 + 4e-6])
    assert evaluate_stop(AbsoluteResidual(1e-5), a, b, x, np.zeros(1))
    # gradient-norm rule reads 2(Ax + b), far from zero here
    assert not evaluate_stop(GradientNorm(1e-5), a, b, x, np.zeros(1))


def test_stop_relative_error_needs_solution():
    with pytest.raises(MissingExactSolution):
        evaluate_stop(RelativeError(1e-5), np.eye(2), np.ones(2), np.ones(2), np.zeros(2))


def test_stop_relative_error_zero_solution_uses_absolute_error():
    rule = RelativeError(1e-3)
    assert evaluate_stop(rule, np.eye(2), np.zeros(2), np.full(2, 1e-4), np.ones(2), np.zeros(2))
    assert not evaluate_stop(rule, np.eye(2), np.zeros(2), np.full(2, 1e-2), np.ones(2), np.zeros(2))


# -- stepsizes ---------------------------------------------------------------

def test_exact_step_example():
    assert exact_line_stepsize(np.diag([1.0, 2.0]), np.array([2.0, 2.0])) == pytest.approx(1.0 / 3.0)


def test_exact_step_identity():
    g = np.array([0.3, -4.0, 2.0])
    assert exact_line_stepsize(np.eye(3), g) == pytest.approx(0.5)


def test_exact_step_nonpositive_curvature():
    with pytest.raises(NonPositiveCurvature):
        exact_line_stepsize(np.diag([1.0, -1.0]), np.array([0.0, 1.0]))


def test_exact_step_zero_direction_converges():
    a = np.diag([1.0, 2.0])
    r = gradient_solve(a, np.zeros(2), np.zeros(2), ExactLineSearch(), AbsoluteResidual(1e-30), 10,
                       SystemForm.BECK)
    assert r.stop_reason is StopReason.CONVERGED
    assert r.iterations == 0


def test_backtracking_example():
    f = lambda x: float(x @ x)  # noqa: E731
    x = np.array([1.0, 0.0])
    grad = 2.0 * x
    t = backtracking_stepsize(f, grad, x, 2.0, 0.25, 0.5)
    assert t == 0.5 == _brute_backtracking(f, grad, x, 2.0, 0.25, 0.5)


def test_backtracking_zero_gradient_returns_s():
    f = lambda x: float(x @ x)  # noqa: E731
    assert backtracking_stepsize(f, np.zeros(2), np.ones(2), 2.0, 0.25, 0.5) == 2.0


def test_backtracking_underflow():
    # every trial point is worse than x, so sufficient decrease never holds
    x = np.array([1.0])
    f = lambda y: 0.0 if np.array_equal(y, x) else 1.0  # noqa: E731
    with pytest.raises(StepUnderflow):
        backtracking_stepsize(f, -x, x, 2.0, 0.25, 0.5)


@given(seed=st.integers(0, 2**32 - 1), s=st.floats(0.1, 10), c=st.floats(0.01, 0.99),
       beta=st.floats(0.1, 0.9))
def test_backtracking_matches_brute_force(seed, s, c, beta):
    rng = np.random.default_rng(seed)
    b0 = rng.standard_normal((3, 3))
    a = b0.T @ b0 + np.eye(3)
    b = rng.standard_normal(3)
    x = rng.standard_normal(3)
    f = quadratic(a, b)
    grad = 2.0 * (a @ x + b)
    t = backtracking_stepsize(f, grad, x, s, c, beta)
    assert t == pytest.approx(_brute_backtracking(f, grad, x, s, c, beta), rel=1e-12)


# -- gradient iteration ------------------------------------------------------

def test_gradient_identity_one_step():
    b = np.array([3.0, -2.0, 7.0])
    r = gradient_solve(np.eye(3), b, np.zeros(3), Constant(1.0), RelativeResidual(1e-12), 10)
    assert r.iterations == 1
    assert np.array_equal(r.final_x, b)
    assert r.stop_reason is StopReason.CONVERGED


def test_gradient_beck_constant_58():
    p = beck_quadratic(2.0)
    r = gradient_solve(p.a, p.b, np.array([2.0, 1.0]), Constant(0.1), GradientNorm(1e-5), 1000,
                       SystemForm.BECK)
    assert r.iterations == 58


def test_gradient_beck_exact_13():
    p = beck_quadratic(2.0)
    r = gradient_solve(p.a, p.b, np.array([2.0, 1.0]), ExactLineSearch(), GradientNorm(1e-5), 1000,
                       SystemForm.BECK)
    assert abs(r.iterations - 13) <= 1


def test_gradient_beck_backtracking_201():
    p = beck_quadratic(0.01)
    r = gradient_solve(p.a, p.b, np.array([0.01, 1.0]), Backtracking(2.0, 0.25, 0.5), GradientNorm(1e-5),
                       1000, SystemForm.BECK)
    assert abs(r.iterations - 201) <= 1


def test_gradient_a1_diverges():
    p = matrix_a1()
    r = gradient_solve(p.a, p.b, np.zeros(4), Constant(1.0), RelativeResidual(1e-5), 1000)
    assert r.stop_reason is StopReason.DIVERGED


def test_gradient_exact_step_indefinite_reports_divergence():
    a = np.diag([1.0, -1.0])
    r = gradient_solve(a, np.zeros(2), np.array([0.0, 1.0]), ExactLineSearch(), GradientNorm(1e-8), 10,
                       SystemForm.BECK)
    assert r.stop_reason is StopReason.DIVERGED


def test_gradient_max_iterations():
    p = beck_quadratic(2.0)
    r = gradient_solve(p.a, p.b, np.array([2.0, 1.0]), Constant(0.1), GradientNorm(1e-5), 5,
                       SystemForm.BECK)
    assert r.stop_reason is StopReason.MAX_ITERATIONS
    assert r.iterations == 5


def test_dimension_checks():
    with pytest.raises(DimensionMismatch):
        gradient_solve(np.eye(2), np.ones(3), np.zeros(2), Constant(1.0), RelativeResidual(1e-5), 5)
    with pytest.raises(DimensionMismatch):
        stabilized_solve(np.ones((2, 3)), np.ones(2), np.zeros(3), 1.0, Constant(1.0),
                         RelativeResidual(1e-5), 5)


# -- stabilized operator and iteration ---------------------------------------

def test_operator_identity():
    b = np.array([1.0, -2.0])
    op = build_stabilized_operator(np.eye(2), b, 1.0, 1.0)
    L = op.m_factor.lower
    assert np.allclose(L @ L.T, 2 * np.eye(2))
    assert np.array_equal(op.n_matrix, np.zeros((2, 2)))
    assert np.allclose(op.c, 2 * b)


def test_operator_scalar():
    b = np.array([3.0])
    op = build_stabilized_operator(np.array([[2.0]]), b, 10.0, 0.0)
    L = op.m_factor.lower
    assert (L @ L.T)[0, 0] == pytest.approx(41.0)
    assert np.array_equal(op.n_matrix, np.eye(1))
    assert op.c == pytest.approx(20 * b)


def test_operator_a2_symmetric_factor():
    p = matrix_a2()
    op = build_stabilized_operator(p.a, p.b, 1e3, 1.0)
    m = op.m_factor.lower @ op.m_factor.lower.T
    assert np.array_equal(m, m.T) or np.max(np.abs(m - m.T)) <= 1e-12 * np.max(np.abs(m))


def test_operator_rejects_nonpositive_gamma():
    with pytest.raises(ValueError):
        build_stabilized_operator(np.eye(2), np.ones(2), 0.0, 1.0)


def test_stabilized_a1_gamma_1e10():
    p = matrix_a1()
    r = stabilized_solve(p.a, p.b, np.zeros(4), 1e10, Constant(1.0), RelativeError(1e-5, p.x_star), 100)
    assert r.iterations == 1
    rel = np.linalg.norm(r.final_x - p.x_star) / np.linalg.norm(p.x_star)
    assert rel <= 1e-6
    # printed value 6.117104e-08, pinned to the x10 band
    assert 6.117104e-9 <= rel <= 6.117104e-7


@pytest.mark.parametrize("gamma", [1e-3, 1.0, 1e8])
def test_stabilized_identity(gamma):
    b = np.array([1.0, 5.0, -2.0])
    r = stabilized_solve(np.eye(3), b, np.zeros(3), gamma, Constant(1.0), RelativeResidual(1e-12), 10)
    assert r.iterations == 1
    assert np.allclose(r.final_x, b, rtol=1e-14)


def test_stabilized_random_3x3_against_direct_solve():
    rng = np.random.default_rng(11)
    a = random_nonsingular(rng, 3)
    b = rng.standard_normal(3)
    r = stabilized_solve(a, b, np.zeros(3), 1e8, Constant(1.0), RelativeResidual(1e-10), 100)
    oracle = np.linalg.solve(a, b)
    assert np.linalg.norm(r.final_x - oracle) <= 1e-6 * np.linalg.norm(oracle)


def test_stabilized_non_constant_stepsizes_reuse_factor():
    p = beck_quadratic(2.0)
    for step in (ExactLineSearch(), Backtracking()):
        r = stabilized_solve(p.a, p.b, np.array([2.0, 1.0]), 1.0, step, GradientNorm(1e-5), 100)
        assert r.stop_reason is StopReason.CONVERGED
        assert len(r.stepsizes) == r.iterations


def test_report_history_lengths():
    p = matrix_a2()
    r = stabilized_solve(p.a, p.b, np.zeros(4), 1e3, Constant(1.0), RelativeError(1e-5), 100,
                         x_star=p.x_star)
    assert len(r.residual_history) == r.iterations + 1
    assert len(r.error_history) == r.iterations + 1
    assert r.residual_history[0] == pytest.approx(np.linalg.norm(p.b))


@pytest.mark.parametrize("alpha", [-10.0, -1.0, 0.001, 1.0, 10.0, 1000.0])
def test_stepsize_irrelevant_at_large_gamma(alpha):
    p = matrix_a1()
    r = stabilized_solve(p.a, p.b, np.zeros(4), 1e12, Constant(alpha), RelativeError(1e-5), 100,
                         x_star=p.x_star)
    assert r.iterations == 1


# -- properties --------------------------------------------------------------

@given(n=st.integers(1, 8), seed=st.integers(0, 2**32 - 1), gamma=st.floats(1e-3, 1e6))
def test_consistency_start_at_solution(n, seed, gamma):
    rng = np.random.default_rng(seed)
    a = random_nonsingular(rng, n)
    x_star = rng.standard_normal(n)
    b = a @ x_star
    rule = RelativeError(1e-8, x_star)
    for r in (gradient_solve(a, b, x_star, Constant(1.0), rule, 10),
              stabilized_solve(a, b, x_star, gamma, Constant(1.0), rule, 10)):
        assert r.iterations == 0
        assert np.array_equal(r.final_x, x_star)


@settings(max_examples=100)
@given(n=st.integers(1, 16), seed=st.integers(0, 2**32 - 1), log_gamma=st.floats(-2, 8),
       alpha=st.floats(-2, 2))
def test_one_step_contraction(n, seed, log_gamma, alpha):
    rng = np.random.default_rng(seed)
    a = random_nonsingular(rng, n)
    x_star = rng.standard_normal(n)
    b = a @ x_star
    gamma = 10.0**log_gamma
    r = stabilized_solve(a, b, np.zeros(n), gamma, Constant(alpha), AbsoluteResidual(1e-300), 6,
                         x_star=x_star)
    s = svd(a).sigma
    factor = np.linalg.norm(np.eye(n) - alpha * a, 2) / (1.0 + gamma * s[-1] ** 2)
    floor = roundoff_floor(s, gamma, x_star)
    e = r.error_history
    for j in range(len(e) - 1):
        assert e[j + 1] <= factor * e[j] * (1 + 1e-8) + floor


@given(n=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
def test_small_gamma_matches_gradient_step(n, seed):
    rng = np.random.default_rng(seed)
    a = np.eye(n) + 0.3 * rng.uniform(-1, 1, (n, n)) / n
    b = rng.standard_normal(n)
    x0 = rng.standard_normal(n)
    rule = AbsoluteResidual(1e-300)
    g = gradient_solve(a, b, x0, Constant(0.5), rule, 1).final_x
    s = stabilized_solve(a, b, x0, 1e-14, Constant(0.5), rule, 1).final_x
    assert np.linalg.norm(s - g) <= 1e-6 * np.linalg.norm(g)
