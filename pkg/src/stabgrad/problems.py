"""Test problem generators.

Every generator returns a :class:`Problem` holding the matrix, the right-hand
side, the exact solution when one is known, and a metadata dictionary.
"""

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import scipy.fft

from .dense import matvec
from .errors import DimensionMismatch, KernelSingularity

A1_ENTRIES = [[1, 2, 3, 4], [4, 5, 6, 7], [4, 3, 2, 0], [0, 2, 3, 4]]
A2_ENTRIES = [[2, 4, -4, 1], [2, 2, 2, 0], [2, 2, 1, 0], [2, 0, 0, 2]]


@dataclass(frozen=True)
class Problem:
    """A linear system ``a x = b`` with optional exact solution."""

    name: str
    a: object
    b: np.ndarray
    x_star: np.ndarray | None
    metadata: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.b.shape[0]

    def dense_matrix(self):
        """The matrix as a dense array (structured operators are expanded)."""
        if isinstance(self.a, np.ndarray):
            return self.a
        return self.a.todense()


def _with_exact_rhs(name, a, x_star, metadata):
    a = np.asarray(a, dtype=float)
    return Problem(name, a, matvec(a, x_star), x_star, metadata)


def matrix_a1():
    """Nonsymmetric 4x4 system with x* = (1, 1, 1, 1)."""
    return _with_exact_rhs("a1", np.array(A1_ENTRIES, float), np.ones(4), {})


def matrix_a2():
    """Second nonsymmetric 4x4 system with x* = (1, 1, 1, 1)."""
    return _with_exact_rhs("a2", np.array(A2_ENTRIES, float), np.ones(4), {})


def identity(n):
    """Identity system with x* = b = (1, 2, ..., n)."""
    x = np.arange(1.0, n + 1.0)
    return _with_exact_rhs("identity", np.eye(n), x, {})


def beck_quadratic(a_param):
    """The quadratic x^2 + a*y^2 as the system diag(1, a) x = 0.

    Parameters
    ----------
    a_param : float
        Positive curvature of the second coordinate.

    Notes
    -----
    The customary starting point ``(a_param, 1)`` is stored as
    ``metadata["x0"]``.
    """
    if not a_param > 0:
        raise ValueError("a_param must be positive")
    a = np.diag([1.0, float(a_param)])
    meta = {
        "a_param": float(a_param),
        "cond": max(a_param, 1.0 / a_param),
        "x0": [float(a_param), 1.0],
    }
    return Problem("beck", a, np.zeros(2), np.zeros(2), meta)


@dataclass(frozen=True)
class KernelProblemSpec:
    """Fredholm equation of the first kind on ``t in [a, b]``, ``s in [c, d]``.

    `collocation` places the s-nodes at cell midpoints or right endpoints.
    `solution_nodes` does the same for the samples of x*; the quadrature
    itself always uses midpoints.
    """

    kernel: Callable
    solution: Callable
    a: float
    b: float
    c: float
    d: float
    n: int
    name: str = "fredholm"
    collocation: str = "midpoint"
    solution_nodes: str = "midpoint"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not (self.b > self.a and self.d > self.c):
            raise ValueError("bounds must satisfy b > a and d > c")
        for opt in (self.collocation, self.solution_nodes):
            if opt not in ("midpoint", "endpoint"):
                raise ValueError(f"node placement must be 'midpoint' or 'endpoint', got {opt!r}")


def _nodes(lo, hi, n, placement):
    offset = 0.5 if placement == "midpoint" else 0.0
    return lo + (np.arange(1, n + 1) - offset) * ((hi - lo) / n)


def discretize_fredholm(spec):
    """Midpoint quadrature-collocation discretization.

    ``a_ij = h K(s_i, t*_j)`` with ``h = (b - a) / n`` and quadrature
    midpoints ``t*_j = a + (j - 1/2) h``; the right-hand side is ``A x*``.
    """
    n = spec.n
    h = (spec.b - spec.a) / n
    s = _nodes(spec.c, spec.d, n, spec.collocation)
    t = _nodes(spec.a, spec.b, n, "midpoint")
    with np.errstate(all="ignore"):
        k = spec.kernel(s[:, None], t[None, :])
    k = np.broadcast_to(np.asarray(k, dtype=float), (n, n))
    if not np.all(np.isfinite(k)):
        raise KernelSingularity(f"{spec.name}: kernel is not finite at some node")
    a = h * k
    x_star = np.asarray(spec.solution(_nodes(spec.a, spec.b, n, spec.solution_nodes)), float)
    meta = {
        "h": h,
        "bounds": [spec.a, spec.b, spec.c, spec.d],
        "collocation": spec.collocation,
        "solution_nodes": spec.solution_nodes,
    }
    return _with_exact_rhs(spec.name, a, x_star, meta)


def _sinc_squared(psi):
    small = np.abs(psi) < 1e-14
    safe = np.where(small, 1.0, psi)
    return np.where(small, 1.0, (np.sin(safe) / safe) ** 2)


def shaw_kernel(s, t, psi_form="sin"):
    """Shaw kernel ``(cos s + cos t)^2 (sin psi / psi)^2``.

    ``psi = pi (sin s + sin t)`` by default; ``psi_form="cos"`` uses
    ``pi (sin s + cos t)`` instead.
    """
    if psi_form == "sin":
        psi = np.pi * (np.sin(s) + np.sin(t))
    elif psi_form == "cos":
        psi = np.pi * (np.sin(s) + np.cos(t))
    else:
        raise ValueError(f"psi_form must be 'sin' or 'cos', got {psi_form!r}")
    return (np.cos(s) + np.cos(t)) ** 2 * _sinc_squared(psi)


def shaw_solution(t, a1=2.0, c1=6.0, t1=0.8, a2=1.0, c2=2.0, t2=-0.5):
    """Two Gaussian bumps centred at `t1` and `t2`."""
    return a1 * np.exp(-c1 * (t - t1) ** 2) + a2 * np.exp(-c2 * (t - t2) ** 2)


def shaw(n, psi_form="sin"):
    """One-dimensional image restoration problem on ``[-pi/2, pi/2]``."""
    spec = KernelProblemSpec(
        kernel=lambda s, t: shaw_kernel(s, t, psi_form),
        solution=shaw_solution,
        a=-np.pi / 2, b=np.pi / 2, c=-np.pi / 2, d=np.pi / 2,
        n=n, name="shaw",
    )
    p = discretize_fredholm(spec)
    return replace(p, metadata={**p.metadata, "psi_form": psi_form})


def heat_kernel(tau, kappa=1.0):
    """Inverse heat kernel ``tau^(-3/2) / (2 kappa sqrt(pi)) exp(-1 / (4 kappa^2 tau))``.

    Zero for ``tau <= 0``.
    """
    tau = np.asarray(tau, dtype=float)
    pos = tau > 0
    safe = np.where(pos, tau, 1.0)
    val = safe ** -1.5 / (2.0 * kappa * np.sqrt(np.pi)) * np.exp(-1.0 / (4.0 * kappa**2 * safe))
    return np.where(pos, val, 0.0)


def heat_solution(t):
    """Piecewise profile: quadratic rise, parabolic cap, exponential decay, zero."""
    t = np.asarray(t, dtype=float)
    return np.select(
        [t <= 0.1, t <= 0.15, t <= 0.5],
        [75.0 * t**2, 0.75 + (20.0 * t - 2.0) * (3.0 - 20.0 * t), 0.75 * np.exp(2.0 * (3.0 - 20.0 * t))],
        0.0,
    )


def heat(n, kappa=1.0, collocation="endpoint"):
    """Inverse heat equation as a Volterra problem on ``[0, 1]``.

    Collocation at the right endpoints ``s_i = i h`` keeps the diagonal
    ``h k(h/2)`` nonzero; midpoint collocation would put ``s_i = t*_i`` on
    the kernel's zero set and make the matrix singular. The exact solution
    is sampled on the same endpoint grid.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    spec = KernelProblemSpec(
        kernel=lambda s, t: heat_kernel(s - t, kappa),
        solution=heat_solution,
        a=0.0, b=1.0, c=0.0, d=1.0,
        n=n, name="heat", collocation=collocation, solution_nodes=collocation,
    )
    p = discretize_fredholm(spec)
    return replace(p, metadata={**p.metadata, "kappa": float(kappa)})


def gravity_kernel(s, t, depth=1.0):
    """Vertical gravity kernel ``depth (depth^2 + (s - t)^2)^(-3/2)``."""
    return depth * (depth**2 + (s - t) ** 2) ** -1.5


def gravity_solution(t):
    return np.sin(np.pi * t) + 0.5 * np.sin(2.0 * np.pi * t)


def gravity(n):
    """One-dimensional gravity surveying problem on ``[0, 1]`` at depth 1."""
    spec = KernelProblemSpec(
        kernel=gravity_kernel, solution=gravity_solution,
        a=0.0, b=1.0, c=0.0, d=1.0, n=n, name="gravity",
    )
    return discretize_fredholm(spec)


class ReactionDiffusionOperator:
    """Five-point ``-Laplacian + kappa^2 I`` on the interior of a uniform grid.

    Unknowns are ordered with x varying fastest. The operator is symmetric
    and diagonalized by the type-I discrete sine transform, which gives exact
    eigenvalues and direct solves with ``I + gamma A^2`` without storing
    the matrix.

    Parameters
    ----------
    m : int
        Interior nodes per side.
    h : float
        Grid spacing.
    kappa : float
        Reaction coefficient.
    """

    def __init__(self, m, h, kappa):
        self.m = int(m)
        self.h = float(h)
        self.kappa = float(kappa)
        p = np.arange(1, self.m + 1)
        mu = 4.0 * np.sin(p * np.pi / (2.0 * (self.m + 1))) ** 2
        self._lam = (mu[:, None] + mu[None, :]) / self.h**2 + self.kappa**2

    @property
    def shape(self):
        n = self.m * self.m
        return (n, n)

    @property
    def T(self):
        return self

    def __matmul__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.shape[0] != self.shape[1]:
            raise DimensionMismatch(f"operator is {self.shape}, vector has shape {x.shape}")
        u = x.reshape(self.m, self.m)
        p = np.pad(u, 1)
        lap = 4.0 * u - p[:-2, 1:-1] - p[2:, 1:-1] - p[1:-1, :-2] - p[1:-1, 2:]
        return (lap / self.h**2 + self.kappa**2 * u).ravel()

    def eigenvalues(self):
        """All eigenvalues, ascending."""
        return np.sort(self._lam.ravel())

    def condition_number(self):
        lam = self._lam
        return float(lam.max() / lam.min())

    def shifted_normal_solver(self, gamma):
        """Return ``r -> (I + gamma A^T A)^{-1} r`` computed in the sine basis."""
        denom = 1.0 + gamma * self._lam**2

        def solve(r):
            r = np.asarray(r, dtype=float).reshape(self.m, self.m)
            coef = scipy.fft.dstn(r, type=1, norm="ortho") / denom
            return scipy.fft.dstn(coef, type=1, norm="ortho").ravel()

        return solve

    def todense(self):
        """Assemble the matrix as a dense array (small grids only)."""
        m = self.m
        t = 2.0 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)
        eye = np.eye(m)
        return (np.kron(eye, t) + np.kron(t, eye)) / self.h**2 + self.kappa**2 * np.eye(m * m)


def rd_exact_solution(x, y):
    """``cos(pi x / 2) sin(4 pi y) - (x^2 - 1)(y^2 - 1)``, zero on the boundary of [-1, 1]^2."""
    return np.cos(0.5 * np.pi * x) * np.sin(4.0 * np.pi * y) - (x**2 - 1.0) * (y**2 - 1.0)


def rd_source(x, y, kappa=1.0):
    """``-Laplacian(u*) + kappa^2 u*`` for :func:`rd_exact_solution`."""
    wave = np.cos(0.5 * np.pi * x) * np.sin(4.0 * np.pi * y)
    minus_lap = (0.25 + 16.0) * np.pi**2 * wave + 2.0 * (x**2 - 1.0) + 2.0 * (y**2 - 1.0)
    return minus_lap + kappa**2 * rd_exact_solution(x, y)


def reaction_diffusion_2d(level, kappa=1.0):
    """Reaction-diffusion problem ``-Laplacian u + kappa^2 u = f`` on [-1, 1]^2.

    Uniform grid with ``2^level`` cells per side, so ``(2^level - 1)^2``
    unknowns and spacing ``h = 2 / 2^level``. Zero Dirichlet data means the
    right-hand side is just `f` at the interior nodes. `x_star` holds the
    exact solution sampled at the nodes.
    """
    if level < 2:
        raise ValueError("level must be at least 2")
    cells = 2**level
    h = 2.0 / cells
    m = cells - 1
    coords = -1.0 + h * np.arange(1, m + 1)
    x, y = np.meshgrid(coords, coords)
    op = ReactionDiffusionOperator(m, h, kappa)
    b = rd_source(x, y, kappa).ravel()
    u = rd_exact_solution(x, y).ravel()
    meta = {
        "level": int(level),
        "h": h,
        "mesh_size": np.sqrt(2.0) * h,
        "kappa": float(kappa),
    }
    return Problem("reaction_diffusion", op, b, u, meta)


def default_start(problem):
    """Starting point recorded in the metadata, else the zero vector."""
    x0 = problem.metadata.get("x0")
    return np.zeros(problem.n) if x0 is None else np.array(x0, dtype=float)


def build(name, n=None, a_param=None, kappa=None, level=None):
    """Construct a problem by name with optional size parameters."""
    if name == "a1":
        return matrix_a1()
    if name == "a2":
        return matrix_a2()
    if name == "identity":
        return identity(n or 4)
    if name == "beck":
        return beck_quadratic(2.0 if a_param is None else a_param)
    if name == "shaw":
        return shaw(n or 1000)
    if name == "heat":
        return heat(n or 1000, 1.0 if kappa is None else kappa)
    if name == "gravity":
        return gravity(n or 1000)
    if name in ("rd", "reaction-diffusion"):
        return reaction_diffusion_2d(level or 4, 1.0 if kappa is None else kappa)
    raise KeyError(f"unknown problem {name!r}")


PROBLEM_NAMES = ("a1", "a2", "identity", "beck", "shaw", "heat", "gravity", "rd")
