"""Dense real matrix and vector kernels.

Products, Cholesky factorization, one-sided Jacobi SVD, condition numbers,
numerical rank and a power-iteration estimate of the spectral radius. All
functions are pure: inputs are never modified.
"""

from dataclasses import dataclass
import warnings

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .errors import (
    DimensionMismatch,
    NonConvergence,
    NonConvergenceWarning,
    NotPositiveDefinite,
    NotSymmetric,
    ZeroMatrix,
)

EPS = np.finfo(float).eps

# Above this many columns svd() hands the sweeps to LAPACK's dgejsv, which
# runs the same preconditioned one-sided Jacobi method in compiled code.
NATIVE_SVD_MAX_COLS = 128


def as_vector(x, name="x"):
    """Return `x` as a finite 1-D float array (a copy)."""
    v = np.array(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatch(f"{name} must be a nonempty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def as_matrix(a, name="a"):
    """Return `a` as a finite 2-D float array (a copy)."""
    m = np.array(a, dtype=float)
    if m.ndim != 2 or m.size == 0:
        raise DimensionMismatch(f"{name} must be a nonempty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def matvec(a, x):
    """Matrix-vector product ``a @ x`` with a shape check.

    Parameters
    ----------
    a : (m, n) array_like
    x : (n,) array_like

    Returns
    -------
    (m,) ndarray
    """
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    if a.ndim != 2 or x.ndim != 1 or a.shape[1] != x.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {x.shape}")
    return a @ x


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular ``L`` with ``L @ L.T`` equal to the factored matrix."""

    lower: np.ndarray

    @property
    def n(self):
        return self.lower.shape[0]


def cholesky_factor(m):
    """Cholesky factorization of a symmetric positive definite matrix.

    Left-looking column algorithm: column j of L is formed from column j of
    `m` minus one matrix-vector product with the columns already computed.

    Raises
    ------
    NotSymmetric
        If `m` is not symmetric to 1e-12 relative.
    NotPositiveDefinite
        If a pivot is not strictly positive.
    """
    m = as_matrix(m, "m")
    n = m.shape[0]
    if m.shape[1] != n:
        raise DimensionMismatch(f"matrix must be square, got {m.shape}")
    scale = np.max(np.abs(m))
    if np.max(np.abs(m - m.T)) > 1e-12 * scale:
        raise NotSymmetric("matrix is not symmetric")

    L = np.zeros_like(m)
    for j in range(n):
        row = L[j, :j]
        pivot = m[j, j] - row @ row
        if not pivot > 0.0:
            raise NotPositiveDefinite(f"pivot {j} is {pivot:.3e}")
        d = np.sqrt(pivot)
        L[j, j] = d
        if j + 1 < n:
            L[j + 1:, j] = (m[j + 1:, j] - L[j + 1:, :j] @ row) / d
    return CholeskyFactor(L)


def cholesky_solve(f, rhs):
    """Solve ``(L L^T) y = rhs`` by forward then back substitution."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != f.n:
        raise DimensionMismatch(f"factor is {f.n}x{f.n}, rhs has length {rhs.shape[0]}")
    y = scipy.linalg.solve_triangular(f.lower, rhs, lower=True, check_finite=False)
    return scipy.linalg.solve_triangular(f.lower, y, lower=True, trans="T", check_finite=False)


@dataclass(frozen=True)
class SvdFactorization:
    """``a = u @ diag(sigma) @ v.T`` with `sigma` sorted in decreasing order.

    `symmetric` records whether the factored matrix was symmetric, which the
    filtered-expansion solver needs.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    symmetric: bool = False

    @property
    def n(self):
        return self.sigma.shape[0]


def _jacobi_sweeps(g, tol, max_sweeps):
    """Orthogonalize the columns of `g` in place by plane rotations.

    Pairs are visited in round-robin order so that every step rotates n/2
    disjoint column pairs at once. Returns the accumulated rotation `z` with
    ``g_in @ z = g_out``.
    """
    n = g.shape[1]
    z = np.eye(n)
    order = np.arange(n)
    half = n // 2
    for _ in range(max_sweeps):
        rotated = False
        for _ in range(n - 1):
            p = order[:half]
            q = order[half:][::-1]
            gp, gq = g[:, p], g[:, q]
            # norm-scaled cosines avoid underflow in squared norms
            na = np.linalg.norm(gp, axis=0)
            nb = np.linalg.norm(gq, axis=0)
            live = (na > 0.0) & (nb > 0.0)
            cos = np.zeros_like(na)
            cos[live] = np.einsum("ij,ij->j", gp[:, live] / na[live], gq[:, live] / nb[live])
            active = np.abs(cos) > tol
            if active.any():
                p, q, na, nb, cos = p[active], q[active], na[active], nb[active], cos[active]
                gp, gq = gp[:, active], gq[:, active]
                with np.errstate(over="ignore", divide="ignore"):
                    zeta = (nb / na - na / nb) / (2.0 * cos)
                    t = np.sign(zeta) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                t[zeta == 0.0] = 1.0
                # near-underflow columns give a zero angle: nothing left to do
                rotated |= bool(np.any(t != 0.0))
                cs = 1.0 / np.sqrt(1.0 + t * t)
                sn = cs * t
                g[:, p] = cs * gp - sn * gq
                g[:, q] = sn * gp + cs * gq
                zp, zq = z[:, p], z[:, q]
                z[:, p] = cs * zp - sn * zq
                z[:, q] = sn * zp + cs * zq
            # keep order[0] fixed and cycle the rest one place
            order = np.concatenate((order[:1], order[-1:], order[1:-1]))
        if not rotated:
            return z
    raise NonConvergence(f"Jacobi SVD did not converge in {max_sweeps} sweeps")


def _complete_columns(w, good):
    """Replace the columns of `w` not flagged `good` by an orthonormal complement."""
    if good.all():
        return w
    k = int(good.sum())
    q, _ = np.linalg.qr(w[:, good], mode="complete") if k else (np.eye(w.shape[0]), None)
    out = w.copy()
    out[:, ~good] = q[:, k:]
    return out


def _native_svd(a, tol, max_sweeps):
    m, n = a.shape
    # pivoted QR first; Jacobi on R^T then needs only a few sweeps
    q, r, piv = scipy.linalg.qr(a, mode="economic", pivoting=True)
    g = np.array(r.T, order="F")
    if n % 2:
        g = np.hstack((g, np.zeros((n, 1))))
    z = _jacobi_sweeps(g, tol, max_sweeps)[:n, :n]
    g = g[:, :n]
    sigma = np.linalg.norm(g, axis=0)
    good = sigma > 0.0
    w = np.zeros_like(g)
    w[:, good] = g[:, good] / sigma[good]
    w = _complete_columns(w, good)
    # R^T = W S Z^T, so A[:, piv] = Q R = (Q Z) S W^T
    u = q @ z
    v = np.empty_like(w)
    v[piv] = w
    return u, sigma, v


def _lapack_svd(a):
    sva, u, v, work, _, info = lapack.dgejsv(a, joba=2, jobu=0, jobv=0, jobr=0, jobt=0, jobp=0)
    if info != 0:
        raise NonConvergence(f"dgejsv returned info={info}")
    return u, sva * (work[0] / work[1]), v


def svd(a, method="auto", tol=1e-14, max_sweeps=60):
    """Singular value decomposition by one-sided Jacobi rotations.

    Columns are rotated until every pair is orthogonal to `tol` relative to
    the product of their norms; the column norms are then the singular
    values.

    Parameters
    ----------
    a : (m, n) array_like
        Matrix with finite entries. Wide matrices are handled through their
        transpose.
    method : {"auto", "native", "lapack"}
        "native" runs the numpy sweeps in this module, "lapack" calls
        dgejsv. "auto" picks native up to 128 columns.
    tol : float
        Orthogonality threshold for the native sweeps.
    max_sweeps : int
        Sweep budget for the native sweeps.

    Returns
    -------
    SvdFactorization

    Raises
    ------
    NonConvergence
        If the sweep budget runs out.
    """
    a = as_matrix(a)
    m, n = a.shape
    scale = np.max(np.abs(a))
    symmetric = m == n and np.max(np.abs(a - a.T)) <= 1e-12 * scale
    if m < n:
        s = svd(a.T, method=method, tol=tol, max_sweeps=max_sweeps)
        return SvdFactorization(s.v, s.sigma, s.u, False)
    if method == "auto":
        method = "native" if n <= NATIVE_SVD_MAX_COLS else "lapack"
    if scale == 0.0:
        u, sigma, v = np.eye(m, n), np.zeros(n), np.eye(n)
    elif method == "native":
        # power-of-two scaling keeps squared column norms clear of underflow
        e = np.frexp(scale)[1]
        u, sigma, v = _native_svd(np.ldexp(a, -e), tol, max_sweeps)
        sigma = np.ldexp(sigma, e)
    elif method == "lapack":
        u, sigma, v = _lapack_svd(a)
    else:
        raise ValueError(f"unknown svd method {method!r}")
    order = np.argsort(-sigma, kind="stable")
    return SvdFactorization(u[:, order], sigma[order], v[:, order], bool(symmetric))


def rank_threshold(s, tol_factor=None):
    """Singular value cutoff used by numerical_rank.

    Without `tol_factor` the cutoff is ``n * spacing(sigma_1)``, the
    floating-point gap at sigma_1 scaled by the dimension (at most
    ``n * eps * sigma_1``).
    """
    sigma1 = s.sigma[0]
    if tol_factor is None:
        return max(s.u.shape[0], s.v.shape[0]) * np.spacing(sigma1)
    if not tol_factor > 0:
        raise ValueError("tol_factor must be positive")
    return tol_factor * sigma1


def numerical_rank(s, tol_factor=None):
    """Number of singular values above ``rank_threshold(s, tol_factor)``."""
    return int(np.count_nonzero(s.sigma > rank_threshold(s, tol_factor)))


def condition_number(s, retained_only=True):
    """Spectral condition number from an SVD.

    Returns sigma_1 / sigma_r with r the numerical rank. With
    ``retained_only=False`` the ratio uses the smallest computed singular
    value instead (``inf`` when it is zero), which is the figure usually
    quoted for rank-deficient discretizations.
    """
    if s.sigma[0] == 0.0:
        raise ZeroMatrix("condition number of the zero matrix")
    if retained_only:
        return float(s.sigma[0] / s.sigma[numerical_rank(s) - 1])
    smallest = s.sigma[-1]
    return float(s.sigma[0] / smallest) if smallest > 0 else np.inf


def spectral_norm(a):
    """Largest singular value of `a`."""
    return float(svd(a).sigma[0])


def _dominant_magnitude(x, y, z):
    """Magnitude of the dominant eigenvalue seen by three Krylov vectors.

    Fits ``z + c1*y + c0*x = 0``. A complex or opposite-sign dominant pair
    leaves y and x independent and the root moduli of
    ``lambda^2 + c1*lambda + c0`` give its magnitude. A single real
    dominant eigenvalue makes the fit degenerate; then ``|x . y|`` is used.
    """
    basis = np.column_stack((y, x))
    sv = np.linalg.svd(basis, compute_uv=False)
    if sv.size < 2 or sv[1] <= 1e-10 * sv[0]:
        return abs(float(x @ y))
    (c1, c0), *_ = np.linalg.lstsq(basis, -z, rcond=None)
    return float(np.max(np.abs(np.roots([1.0, c1, c0]))))


def spectral_radius_estimate(apply, n, restarts=8, tol=1e-9, max_iters=10_000, seed=42):
    """Estimate max |lambda| of a linear operator by power iteration.

    Each restart starts from a random unit vector and takes two operator
    applications per step, so that dominant complex-conjugate or ``+/-``
    pairs are resolved from the two-step recurrence instead of making the
    one-step ratio oscillate.

    Parameters
    ----------
    apply : callable
        ``apply(x)`` returns the operator applied to a length-`n` vector.
    n : int
    restarts, tol, max_iters : int, float, int
        Independent starts, relative change tolerance on the estimate and
        step budget per start.
    seed : int or numpy.random.Generator

    Returns
    -------
    float
        Largest estimate over the restarts. A NonConvergenceWarning is
        emitted when no restart met `tol`.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    best = 0.0
    any_converged = False
    for _ in range(restarts):
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        previous = np.inf
        estimate = 0.0
        converged = False
        for _ in range(max_iters):
            y = np.asarray(apply(x), dtype=float)
            z = np.asarray(apply(y), dtype=float)
            norm_z = np.linalg.norm(z)
            if norm_z == 0.0:
                estimate, converged = 0.0, True
                break
            estimate = _dominant_magnitude(x, y, z)
            if abs(estimate - previous) <= tol * estimate:
                converged = True
                break
            previous = estimate
            x = z / norm_z
        any_converged |= converged
        best = max(best, estimate)
    if not any_converged:
        warnings.warn(
            f"spectral radius estimate did not settle to {tol:g} in {max_iters} steps",
            NonConvergenceWarning,
            stacklevel=2,
        )
    return best
