"""Command line front end: ``stabgrad problem|solve|table|analyze``.

Exit codes: 0 success (or Converged), 1 bad configuration, 2 MaxIterations,
3 Diverged.
"""

import argparse
import os
import sys

import numpy as np

from . import analysis, formats, problems, tables
from . import errors
from .dense import condition_number, numerical_rank, spectral_radius_estimate, svd
from .solvers import (
    AbsoluteResidual,
    Backtracking,
    Constant,
    ExactLineSearch,
    GradientNorm,
    RelativeError,
    RelativeResidual,
    StopReason,
    SystemForm,
    gradient_solve,
    stabilized_solve,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_MAX_ITERATIONS = 2
EXIT_DIVERGED = 3

STOP_RULES = {
    "rel-residual": RelativeResidual,
    "rel-error": RelativeError,
    "grad-norm": GradientNorm,
    "abs-residual": AbsoluteResidual,
}
EXIT_CODES = {
    StopReason.CONVERGED: EXIT_OK,
    StopReason.MAX_ITERATIONS: EXIT_MAX_ITERATIONS,
    StopReason.DIVERGED: EXIT_DIVERGED,
}


NUMERICAL_FAILURES = (
    errors.NotPositiveDefinite,
    errors.NonConvergence,
    errors.NonPositiveCurvature,
    errors.StepUnderflow,
    errors.ZeroMatrix,
    errors.NotSymmetric,
    errors.KernelSingularity,
    errors.MissingExactSolution,
)


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would collide with MaxIterations
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_problem_args(p, name_flag):
    if name_flag:
        p.add_argument("--problem", required=True, choices=problems.PROBLEM_NAMES)
    p.add_argument("--n", type=int, help="size of the Fredholm or identity problems")
    p.add_argument("--a-param", type=float, help="curvature of the Beck quadratic")
    p.add_argument("--kappa", type=float, help="heat kappa or reaction coefficient")
    p.add_argument("--level", type=int, help="reaction-diffusion refinement level")


def _build_problem(name, args):
    if args.n is not None and args.n < 1:
        raise ConfigError("--n must be positive")
    try:
        return problems.build(name, n=args.n, a_param=args.a_param, kappa=args.kappa, level=args.level)
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _out_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create {path}: {exc}") from exc
    return path


def _emit(path, text):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc


def _records(header, rows):
    return [dict(zip(header, row)) for row in rows]


def _tabular(header, rows, fmt):
    if fmt == "json":
        return formats.json_text({"columns": list(header), "rows": _records(header, rows)})
    return formats.csv_text(header, rows)


# -- problem ----------------------------------------------------------------

def cmd_problem(args):
    p = _build_problem(args.name, args)
    out = _out_dir(args.out)
    a = p.dense_matrix()
    if args.format == "csv":
        matrix_file = os.path.join(out, f"{args.name}_matrix.csv")
        formats.write_csv(matrix_file, [f"c{j}" for j in range(a.shape[1])], a.tolist())
    else:
        matrix_file = os.path.join(out, f"{args.name}.mtx")
        formats.write_matrix_market(matrix_file, a, comment=f"stabgrad problem {args.name}")
    cols = ["b"] + ([] if p.x_star is None else ["x_star"])
    data = [p.b] + ([] if p.x_star is None else [p.x_star])
    formats.write_csv(os.path.join(out, f"{args.name}_vectors.csv"), cols, list(zip(*data)))

    meta = {"name": p.name, "n": p.n, **p.metadata}
    if args.with_rank or args.with_cond:
        s = svd(a)
        if args.with_rank:
            meta["rank"] = numerical_rank(s)
        if args.with_cond:
            meta["cond"] = condition_number(s)
            meta["cond_full"] = condition_number(s, retained_only=False)
    formats.write_json(os.path.join(out, f"{args.name}_meta.json"), meta)
    return EXIT_OK


# -- solve ------------------------------------------------------------------

def _stepsize(args):
    if args.stepsize == "constant":
        return Constant(args.alpha)
    if args.stepsize == "exact":
        return ExactLineSearch()
    return Backtracking(args.bt_s, args.bt_slope, args.bt_shrink)


def _parse_x0(text, n):
    try:
        x0 = np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise ConfigError(f"bad --x0: {text!r}") from exc
    if x0.shape != (n,):
        raise ConfigError(f"--x0 has {x0.size} entries, problem has {n}")
    return x0


def cmd_solve(args):
    p = _build_problem(args.problem, args)
    if args.kmax < 0:
        raise ConfigError("--kmax must be nonnegative")
    try:
        step = _stepsize(args)
        stop = STOP_RULES[args.stop](args.eps)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.stop == "rel-error" and p.x_star is None:
        raise ConfigError("rel-error needs a problem with a known solution")
    x0 = problems.default_start(p) if args.x0 is None else _parse_x0(args.x0, p.n)
    mode = args.mode or ("beck" if args.problem == "beck" else "linear")

    if args.method == "stabilized":
        if args.gamma is None or not args.gamma > 0:
            raise ConfigError("stabilized method needs --gamma > 0")
        if mode != "linear" and args.problem != "beck":
            raise ConfigError("the stabilized method only solves the linear form")
        report = stabilized_solve(p.a, p.b, x0, args.gamma, step, stop, args.kmax, x_star=p.x_star)
    else:
        if not isinstance(p.a, np.ndarray) and args.stepsize != "constant":
            raise ConfigError("line searches need a dense problem")
        report = gradient_solve(p.a, p.b, x0, step, stop, args.kmax, SystemForm(mode), x_star=p.x_star)

    params = {
        "n": p.n, "gamma": args.gamma, "alpha": args.alpha, "stepsize": args.stepsize,
        "stop": args.stop, "eps": args.eps, "kmax": args.kmax, "mode": mode,
        "x0": x0, **{k: v for k, v in p.metadata.items() if k != "x0"},
    }
    doc = {
        "problem": args.problem,
        "method": args.method,
        "params": params,
        "iterations": report.iterations,
        "stop_reason": report.stop_reason.value,
        "final_residual": report.final_residual,
    }
    if report.final_error is not None:
        doc["final_error"] = report.final_error
    doc["final_x"] = report.final_x
    doc["histories"] = {
        "residual": report.residual_history,
        "error": report.error_history,
        "stepsize": report.stepsizes,
    }

    out = _out_dir(args.out)
    formats.write_json(os.path.join(out, "report.json"), doc)
    header = ["k", "residual"] + ([] if report.error_history is None else ["error"])
    rows = []
    for k, r in enumerate(report.residual_history):
        rows.append([k, r] + ([] if report.error_history is None else [report.error_history[k]]))
    formats.write_csv(os.path.join(out, "history.csv"), header, rows)
    print(f"{report.stop_reason.value} after {report.iterations} iterations, "
          f"residual {report.final_residual:.6e}")
    return EXIT_CODES[report.stop_reason]


# -- table ------------------------------------------------------------------

def cmd_table(args):
    if args.table_id not in tables.TABLES:
        raise ConfigError(f"unknown table {args.table_id!r}; known: {', '.join(tables.TABLES)}")
    if args.n is not None and args.n < 2:
        raise ConfigError("--n must be at least 2")
    try:
        header, rows = tables.run_table(args.table_id, n=args.n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _emit(args.out, _tabular(header, rows, args.format))
    return EXIT_OK


# -- analyze ----------------------------------------------------------------

def _log_grid(lo, hi, points):
    if not (lo > 0 and hi > 0 and np.isfinite(lo) and np.isfinite(hi)):
        raise ConfigError("sweep bounds must be positive and finite")
    if lo > hi:
        raise ConfigError("sweep lower bound exceeds the upper bound")
    if points < 1 or (points == 1 and lo != hi):
        raise ConfigError("a sweep needs at least two points unless its bounds coincide")
    return np.logspace(np.log10(lo), np.log10(hi), points)


def _analyze_filter_factors(args):
    sigma = _log_grid(args.sigma_min, args.sigma_max, args.points)
    ks = args.k or [1]
    if min(ks) < 1:
        raise ConfigError("--k values must be at least 1")
    if not args.gamma_value > 0:
        raise ConfigError("--gamma must be positive")
    series = [analysis.filter_factors(sigma, args.alpha, args.gamma_value, k).phi for k in ks]
    header = ["sigma"] + [f"phi_k{k}" for k in ks]
    return header, [[s, *vals] for s, *vals in zip(sigma, *series)]


def _dense_problem(args):
    p = _build_problem(args.problem, args)
    if not isinstance(p.a, np.ndarray):
        raise ConfigError(f"problem {args.problem!r} is not stored densely")
    return p


def _analyze_spectral_radius(args):
    gammas = _log_grid(args.gamma_min, args.gamma_max, args.points)
    p = _dense_problem(args)

    def cell(gamma):
        apply = analysis.stabilized_iteration_matrix(p.a, args.alpha, gamma)
        return spectral_radius_estimate(apply, p.n, seed=args.seed)

    rho = tables.parallel_map(cell, gammas)
    return ["gamma", "spectral_radius"], [[g, r] for g, r in zip(gammas, rho)]


def _analyze_error_bound(args):
    if args.gamma_value is None or not args.gamma_value > 0:
        raise ConfigError("--gamma must be positive")
    if args.kmax < 1:
        raise ConfigError("--kmax must be at least 1")
    p = _dense_problem(args)
    x0 = np.zeros(p.n)
    # run exactly kmax steps so every bound has an observed error to compare with
    report = stabilized_solve(p.a, p.b, x0, args.gamma_value, Constant(args.alpha),
                              AbsoluteResidual(np.finfo(float).tiny), args.kmax, x_star=p.x_star)
    e0 = float(report.error_history[0])
    params = analysis.bound_parameters(p.a, [args.alpha], e0)
    rows = [[0, e0, e0]]
    for k in range(1, report.iterations + 1):
        rows.append([k, report.error_history[k], analysis.error_bound(params, args.gamma_value, k)])
    return ["k", "error", "bound"], rows


ANALYSES = {
    "filter-factors": _analyze_filter_factors,
    "spectral-radius": _analyze_spectral_radius,
    "error-bound": _analyze_error_bound,
}


def cmd_analyze(args):
    header, rows = ANALYSES[args.kind](args)
    _emit(args.out, _tabular(header, rows, args.format))
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def build_parser():
    parser = _Parser(prog="stabgrad", description="Stabilized gradient method experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("problem", help="write a test problem to disk")
    p.add_argument("name", choices=problems.PROBLEM_NAMES)
    _add_problem_args(p, name_flag=False)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", choices=["matrixmarket", "csv"], default="matrixmarket")
    p.add_argument("--with-rank", action="store_true")
    p.add_argument("--with-cond", action="store_true")
    p.set_defaults(func=cmd_problem)

    s = sub.add_parser("solve", help="run one solve and write report.json and history.csv")
    _add_problem_args(s, name_flag=True)
    s.add_argument("--method", choices=["gradient", "stabilized"], default="stabilized")
    s.add_argument("--gamma", type=float)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--stepsize", choices=["constant", "exact", "backtracking"], default="constant")
    s.add_argument("--bt-s", type=float, default=2.0, help="backtracking initial step")
    s.add_argument("--bt-slope", type=float, default=0.25, help="backtracking sufficient-decrease factor")
    s.add_argument("--bt-shrink", type=float, default=0.5, help="backtracking shrink factor")
    s.add_argument("--stop", choices=list(STOP_RULES), default="rel-residual")
    s.add_argument("--eps", type=float, default=1e-5)
    s.add_argument("--kmax", type=int, default=100)
    s.add_argument("--mode", choices=["linear", "beck"])
    s.add_argument("--x0", help="comma separated starting point")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_solve)

    t = sub.add_parser("table", help="rerun one experiment table")
    t.add_argument("table_id")
    t.add_argument("--n", type=int, help="override the problem size (Fredholm tables)")
    t.add_argument("--out", help="output file (default: stdout)")
    t.add_argument("--format", choices=["csv", "json"], default="csv")
    t.set_defaults(func=cmd_table)

    a = sub.add_parser("analyze", help="data series for filter factors, spectral radii, error bounds")
    a.add_argument("kind", choices=list(ANALYSES))
    _add_problem_args(a, name_flag=False)
    a.add_argument("--problem", choices=problems.PROBLEM_NAMES, default="a1")
    a.add_argument("--alpha", type=float, default=1.0)
    a.add_argument("--gamma", dest="gamma_value", type=float, default=1.0)
    a.add_argument("--gamma-min", type=float, default=1.0)
    a.add_argument("--gamma-max", type=float, default=1e15)
    a.add_argument("--sigma-min", type=float, default=1e-8)
    a.add_argument("--sigma-max", type=float, default=1.0)
    a.add_argument("--points", type=int, default=16)
    a.add_argument("--k", type=int, action="append", help="iteration count (repeatable)")
    a.add_argument("--kmax", type=int, default=20)
    a.add_argument("--seed", type=int, default=42)
    a.add_argument("--out", help="output file (default: stdout)")
    a.add_argument("--format", choices=["csv", "json"], default="csv")
    a.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"stabgrad: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_FAILURES as exc:
        # e.g. I + gamma A^T A losing definiteness for an oversized gamma
        print(f"stabgrad: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
