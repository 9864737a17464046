"""Parameter grids for the published experiment tables.

Each table reruns one grid of stabilized solves and returns rows whose
columns are listed in ``TABLES[table_id].columns``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import os
from typing import Callable

import numpy as np

from . import problems
from .solvers import (
    Backtracking,
    Constant,
    ExactLineSearch,
    GradientNorm,
    RelativeError,
    RelativeResidual,
    stabilized_solve,
)

STANDARD_COLUMNS = ("gamma", "residual", "relative_residual", "error", "relative_error", "iterations")
BECK_COLUMNS = ("gamma", "gradient_norm", "relative_gradient_norm", "error", "iterations", "x1", "x2")
MESH_COLUMNS = (
    "level", "h", "residual", "relative_residual", "error", "error_ratio",
    "relative_error", "iterations", "cond",
)

WELLC_GAMMAS = (1e3, 1e4, 1e5, 1e6, 1e10, 1e12)
BECK_GAMMAS = (1.0, 10.0, 1e2, 1e5, 1e7, 1e10)
SHAW_GAMMAS = (1e3, 1e4, 1e5, 1e6, 1e10, 1e12, 1e14)
HEAT_GAMMAS = (1e3, 1e4, 1e5, 1e6, 1e10, 1e12, 1e16)
GRAVITY_GAMMAS = (1e3, 1e4, 1e5, 1e6, 1e10, 1e12, 1e15)
EF0_GAMMAS = (1e4, 1e6, 1e8, 1e10, 1e15, 1e20)


def max_workers():
    """Worker cap for grid cells, from STABGRAD_THREADS (default: CPU count)."""
    raw = os.environ.get("STABGRAD_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    value = int(raw)
    if value < 1:
        raise ValueError("STABGRAD_THREADS must be a positive integer")
    return value


def parallel_map(fn, items):
    """Map `fn` over `items` on a thread pool; results keep input order."""
    items = list(items)
    workers = min(max_workers(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class TableSpec:
    table_id: str
    description: str
    columns: tuple
    run: Callable


def _norms(p, x0, report):
    x = report.final_x
    r0 = np.linalg.norm(p.a @ x0 - p.b)
    res = report.final_residual
    err = float(np.linalg.norm(x - p.x_star))
    ref = float(np.linalg.norm(p.x_star))
    return res, (res / r0 if r0 > 0 else 0.0), err, (err / ref if ref > 0 else err)


def _gamma_rows(p, gammas, step, stop, k_max, x0=None):
    x0 = np.zeros(p.n) if x0 is None else np.asarray(x0, dtype=float)

    def cell(gamma):
        report = stabilized_solve(p.a, p.b, x0, gamma, step, stop, k_max, x_star=p.x_star)
        res, rel_res, err, rel_err = _norms(p, x0, report)
        return (gamma, res, rel_res, err, rel_err, report.iterations)

    return parallel_map(cell, gammas)


def _wellc(problem):
    def run(n=None):
        p = problem()
        return _gamma_rows(p, WELLC_GAMMAS, Constant(1.0), RelativeError(1e-5), 100)
    return run


def _beck(a_param, x0, step, k_max):
    def run(n=None):
        p = problems.beck_quadratic(a_param)
        x_init = np.asarray(x0, dtype=float)
        g0 = np.linalg.norm(2.0 * (p.a @ x_init + p.b))

        def cell(gamma):
            report = stabilized_solve(p.a, p.b, x_init, gamma, step, GradientNorm(1e-5), k_max, x_star=p.x_star)
            x = report.final_x
            g = float(np.linalg.norm(2.0 * (p.a @ x + p.b)))
            err = float(np.linalg.norm(x - p.x_star))
            return (gamma, g, g / g0, err, report.iterations, x[0], x[1])

        return parallel_map(cell, BECK_GAMMAS)
    return run


def _fredholm(generator, gammas):
    def run(n=None):
        n = 1000 if n is None else n
        p = generator(n)
        return _gamma_rows(p, gammas, Constant(1.0), RelativeResidual(1e-5), n)
    return run


def _ef0(n=None):
    p = problems.reaction_diffusion_2d(6)
    eps = p.metadata["mesh_size"]
    return _gamma_rows(p, EF0_GAMMAS, Constant(1.0), RelativeError(eps), 100)


def _ef1(n=None):
    levels = range(4, 9)

    def cell(level):
        p = problems.reaction_diffusion_2d(level)
        x0 = np.zeros(p.n)
        stop = RelativeError(p.metadata["mesh_size"])
        report = stabilized_solve(p.a, p.b, x0, 1e15, Constant(1.0), stop, 100, x_star=p.x_star)
        return p, _norms(p, x0, report), report.iterations

    rows = []
    previous = None
    for p, (res, rel_res, err, rel_err), its in parallel_map(cell, levels):
        ratio = previous / err if previous is not None else float("nan")
        rows.append((p.metadata["level"], p.metadata["mesh_size"], res, rel_res, err, ratio,
                     rel_err, its, p.a.condition_number()))
        previous = err
    return rows


TABLES = {
    "wellc1": TableSpec("wellc1", "A1 system, relative-error stop, gamma sweep",
                        STANDARD_COLUMNS, _wellc(problems.matrix_a1)),
    "wellc2": TableSpec("wellc2", "A2 system, relative-error stop, gamma sweep",
                        STANDARD_COLUMNS, _wellc(problems.matrix_a2)),
    "tab461": TableSpec("tab461", "Beck quadratic a=2, exact line search",
                        BECK_COLUMNS, _beck(2.0, (2.0, 1.0), ExactLineSearch(), 100)),
    "tab481": TableSpec("tab481", "Beck quadratic a=2, constant stepsize 0.1",
                        BECK_COLUMNS, _beck(2.0, (2.0, 1.0), Constant(0.1), 100)),
    "tab491": TableSpec("tab491", "Beck quadratic a=1/100, backtracking",
                        BECK_COLUMNS, _beck(0.01, (0.01, 1.0), Backtracking(2.0, 0.25, 0.5), 1000)),
    "shaw1": TableSpec("shaw1", "shaw problem, relative-residual stop",
                       STANDARD_COLUMNS, _fredholm(problems.shaw, SHAW_GAMMAS)),
    "heat1": TableSpec("heat1", "heat problem, relative-residual stop",
                       STANDARD_COLUMNS, _fredholm(problems.heat, HEAT_GAMMAS)),
    "gravity1": TableSpec("gravity1", "gravity problem, relative-residual stop",
                          STANDARD_COLUMNS, _fredholm(problems.gravity, GRAVITY_GAMMAS)),
    "ef0": TableSpec("ef0", "reaction-diffusion level 6, gamma sweep",
                     STANDARD_COLUMNS, _ef0),
    "ef1": TableSpec("ef1", "reaction-diffusion levels 4-8 at gamma=1e15",
                     MESH_COLUMNS, _ef1),
}


def run_table(table_id, n=None):
    """Run a table by id. Returns (columns, rows)."""
    try:
        spec = TABLES[table_id]
    except KeyError:
        raise KeyError(f"unknown table {table_id!r}; known: {', '.join(TABLES)}") from None
    return spec.columns, spec.run(n)
