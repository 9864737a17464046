"""Iteration operators, SVD filter factors and a-priori error bounds."""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dense import numerical_rank, spectral_norm, svd
from .errors import NotSymmetric
from .solvers import build_stabilized_operator


def gradient_iteration_matrix(a, alpha):
    """Iteration matrix ``I - alpha A`` of the plain gradient scheme.

    This is ``M^{-1} N`` for the splitting ``M = I / alpha``,
    ``N = I / alpha - A``.
    """
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    a = np.asarray(a, dtype=float)
    return np.eye(a.shape[0]) - alpha * a


def stabilized_iteration_matrix(a, alpha, gamma):
    """The map ``x -> (I + gamma A^T A)^{-1} (I - alpha A) x`` as a callable.

    The inverse is applied through the factorization; the matrix is never
    formed.
    """
    op = build_stabilized_operator(a, np.zeros(a.shape[0]), gamma, alpha)
    return lambda x: op.solve_m(op.apply_n(np.asarray(x, dtype=float)))


@dataclass(frozen=True, eq=False)
class FilterFactorTable:
    sigma: np.ndarray
    k: int
    alpha: float
    gamma: float
    phi: np.ndarray


def filter_factors(sigma, alpha, gamma, k):
    """Filter factors of the k-th stabilized iterate started from zero.

    ``phi_i = q_i (1 - r_i^k) / (1 - r_i)`` with
    ``q_i = (alpha s_i + gamma s_i^2) / (1 + gamma s_i^2)`` and
    ``r_i = (1 - alpha s_i) / (1 + gamma s_i^2)``. When ``|1 - r_i| < 1e-14``
    the geometric sum is replaced by its limit ``k``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    s = np.asarray(sigma, dtype=float)
    if np.any(s <= 0):
        raise ValueError("singular values must be positive")
    denom = 1.0 + gamma * s**2
    q = (alpha * s + gamma * s**2) / denom
    r = (1.0 - alpha * s) / denom
    one_minus_r = 1.0 - r
    degenerate = np.abs(one_minus_r) < 1e-14
    with np.errstate(divide="ignore", invalid="ignore"):
        geometric = np.where(degenerate, float(k), (1.0 - r**k) / np.where(degenerate, 1.0, one_minus_r))
    return FilterFactorTable(s, int(k), float(alpha), float(gamma), q * geometric)


def svd_expansion_solve(s, b, alpha, gamma, k):
    """Filtered expansion ``sum_i phi_i (v_i^T b / s_i) v_i``.

    Equals the k-th stabilized iterate from zero when the factored matrix is
    symmetric positive semidefinite. Only singular values above the rank
    threshold enter the sum.

    Raises
    ------
    NotSymmetric
        If the factorization came from a nonsymmetric matrix.
    """
    if not s.symmetric:
        raise NotSymmetric("the filtered expansion needs a symmetric matrix")
    r = numerical_rank(s)
    v = s.v[:, :r]
    sig = s.sigma[:r]
    phi = filter_factors(sig, alpha, gamma, k).phi
    return v @ (phi * (v.T @ np.asarray(b, dtype=float)) / sig)


def naive_svd_solution(s, b, return_excluded=False):
    """Unfiltered SVD solution ``sum_i (u_i^T b / s_i) v_i``.

    Singular values below the rank threshold are skipped; with
    ``return_excluded=True`` the number skipped is returned as well.
    """
    r = numerical_rank(s)
    coef = (s.u[:, :r].T @ np.asarray(b, dtype=float)) / s.sigma[:r]
    x = s.v[:, :r] @ coef
    return (x, s.n - r) if return_excluded else x


@dataclass(frozen=True)
class BoundParameters:
    """Inputs of the a-priori error bound.

    `contraction_factors` holds ``||I - alpha_i A||`` for each step taken.
    """

    kappa_v: float
    sigma_min: float
    contraction_factors: Sequence[float]
    initial_error: float

    def __post_init__(self):
        if self.kappa_v < 1:
            raise ValueError("kappa_v must be at least 1")


def orthogonal_condition(v):
    """``||V|| ||V^{-1}||`` from the singular values of V, clamped to >= 1."""
    sv = svd(v).sigma
    return max(1.0, float(sv[0] / sv[-1]))


def bound_parameters(a, alphas, initial_error, factorization=None):
    """Collect BoundParameters for a matrix and a sequence of stepsizes."""
    a = np.asarray(a, dtype=float)
    s = factorization or svd(a)
    eye = np.eye(a.shape[0])
    norms = {}
    factors = []
    for alpha in alphas:
        if alpha not in norms:
            norms[alpha] = spectral_norm(eye - alpha * a)
        factors.append(norms[alpha])
    return BoundParameters(orthogonal_condition(s.v), float(s.sigma[-1]), tuple(factors), float(initial_error))


def error_bound(p, gamma, k):
    """Bound on ``||x_k - x*||`` after k stabilized steps.

    ``(kappa_v / (1 + gamma s_min^2))^k * prod_{i<k} ||I - alpha_i A|| * e0``.
    A single contraction factor is reused for every step.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    factors = list(p.contraction_factors)
    if len(factors) == 1:
        factors = factors * k
    if len(factors) < k:
        raise ValueError(f"need {k} contraction factors, got {len(factors)}")
    ratio = p.kappa_v / (1.0 + gamma * p.sigma_min**2)
    return float(ratio**k * np.prod(factors[:k]) * p.initial_error)


def convergence_factor(a, alpha, gamma, factorization=None):
    """Per-step contraction ``kappa_v ||I - alpha A|| / (1 + gamma s_min^2)``."""
    a = np.asarray(a, dtype=float)
    s = factorization or svd(a)
    kappa_v = orthogonal_condition(s.v)
    return kappa_v * spectral_norm(np.eye(a.shape[0]) - alpha * a) / (1.0 + gamma * s.sigma[-1] ** 2)


def convergence_region_check(a, alpha, gamma):
    """True when the per-step contraction factor is below one."""
    return bool(convergence_factor(a, alpha, gamma) < 1.0)
