"""Experiment runner: solve / compare / uq / bounds subcommands.

Reproduces the library's figure- and table-style pipelines at desk
scale, emitting CSV histories, JSON summaries, and PGM images.  All
outputs are byte-reproducible given the same config and seed.  Flags
mirror the RunConfig fields (kebab-case); --config loads a flat JSON
file with the same keys, and command-line flags override it.

Exit codes: 0 success, 1 usage/config error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .diagnostics import plain_bound_report, hybrid_bound_report
from .golub_kahan import gk_run
from .hessenberg import PivotStrategy, hess_run
from .operators import (load_dense_problem, make_gravity_problem,
                        make_tomo_problem)
from .pgm import write_pgm
from .projected import LambdaRule
from .solvers import SolverConfig, run_hybrid_lsqr, solve
from .uq import build_uq, build_uq_bidiag, covariance_sum, variance_diagonal

EMIT_CHOICES = ("history_csv", "summary_json", "recon_pgm", "basis_pgm",
                "bounds_csv", "uq_csv")


class UsageError(Exception):
    """Configuration problem the user can fix (exit code 1)."""


@dataclass
class RunConfig:
    """Flat experiment configuration (JSON schema and CLI flags)."""

    problem: str = "gravity"
    n: int = 32
    depth: float = 0.25
    angles: int | None = None
    detectors: int | None = None
    matrix_file: str | None = None
    rhs_file: str | None = None
    noise_level: float = 1e-2
    seed: int = 0
    method: str = "hybrid_lslu"
    maxiter: int = 50
    lambda_rule: str = "wgcv"
    lambda_value: float | None = None
    stop_tol: float | None = None
    pivot: str = "full"
    sample_size: int | None = None
    pivot_seed: int = 0
    sample_sizes: list = field(default_factory=lambda: [25, 50, 100])
    k_max: int = 15
    sigma2: float | None = None
    reg: float | None = None
    output_dir: str = "."
    emit: list = field(default_factory=lambda: ["history_csv", "summary_json"])


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, header, rows):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def build_problem(config):
    """Instantiate the configured test problem.

    Returns (op, b, x_true, e, image_shapes) where image_shapes maps
    'solution'/'data' to 2-D shapes when the spaces are images.
    """
    if config.problem == "gravity":
        prob = make_gravity_problem(config.n, config.depth,
                                    config.noise_level, config.seed)
        return prob.op, prob.b, prob.x_true, prob.e, {}
    if config.problem == "tomo":
        prob = make_tomo_problem(config.n, config.angles, config.detectors,
                                 config.noise_level, config.seed)
        detectors = (config.detectors if config.detectors is not None
                     else int(round(np.sqrt(2.0) * config.n)))
        angles = config.angles if config.angles is not None else config.n
        shapes = {"solution": (config.n, config.n),
                  "data": (angles, detectors)}
        return prob.op, prob.b, prob.x_true, prob.e, shapes
    if config.problem == "dense_file":
        if not config.matrix_file or not config.rhs_file:
            raise UsageError("dense_file problem needs --matrix-file and --rhs-file")
        op, b = load_dense_problem(config.matrix_file, config.rhs_file)
        return op, b, None, None, {}
    raise UsageError(f"unknown problem {config.problem!r}")


def make_pivot(config):
    if config.pivot == "sampled":
        if config.sample_size is None:
            raise UsageError("sampled pivoting needs --sample-size")
        return PivotStrategy.sampled(config.sample_size, seed=config.pivot_seed)
    return PivotStrategy(kind=config.pivot)


def make_rule(config, x_true):
    if config.lambda_rule == "fixed":
        if config.lambda_value is None:
            raise UsageError("fixed lambda rule needs --lambda-value")
        return LambdaRule.fixed(config.lambda_value)
    if config.lambda_rule == "optimal":
        if x_true is None:
            raise UsageError("optimal lambda rule needs a problem with a known truth")
        return LambdaRule.optimal(x_true)
    return LambdaRule(kind=config.lambda_rule)


def make_solver_config(config, x_true, method=None, pivot=None):
    return SolverConfig(
        method=method or config.method,
        maxiter=config.maxiter,
        pivot=pivot or make_pivot(config),
        lambda_rule=make_rule(config, x_true),
        stop_tol=config.stop_tol,
        track_truth=x_true,
    )


def _history_rows(result):
    k_reached = result.k_reached
    resid = result.residual_norms or [float("nan")] * k_reached
    relerr = result.relative_errors or [float("nan")] * k_reached
    for i in range(k_reached):
        yield (i + 1, resid[i], relerr[i], result.lambdas[i], result.ghats[i])


def cmd_solve(config):
    op, b, x_true, _, shapes = build_problem(config)
    result = solve(op, b, make_solver_config(config, x_true))
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)

    if "history_csv" in config.emit:
        write_csv(outdir / "history.csv",
                  ["k", "residual_norm", "relative_error", "lambda", "ghat"],
                  _history_rows(result))
    if "summary_json" in config.emit:
        k = result.k_stop
        summary = {
            "problem": config.problem,
            "method": config.method,
            "m": op.nrows,
            "n": op.ncols,
            "noise_level": config.noise_level,
            "seed": config.seed,
            "maxiter": config.maxiter,
            "k_stop": k,
            "stop_reason": result.stop_reason,
            "lambda_final": result.lambdas[k - 1] if k >= 1 else None,
            "relative_error_final": (result.relative_errors[k - 1]
                                     if result.relative_errors and k >= 1 else None),
            "residual_norm_final": (result.residual_norms[k - 1]
                                    if result.residual_norms and k >= 1 else None),
        }
        with open(outdir / "summary.json", "w", encoding="ascii") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if "recon_pgm" in config.emit:
        shape = shapes.get("solution", (1, op.ncols))
        write_pgm(outdir / "recon.pgm", result.x_final.reshape(shape))
    if "basis_pgm" in config.emit:
        state = result.state
        sol_shape = shapes.get("solution", (1, op.ncols))
        data_shape = shapes.get("data", (1, op.nrows))
        basis = state.solution_basis
        resid_basis = state.D if hasattr(state, "D") else state.U
        for k in (2, 4, 6, 8, 10):
            if k <= basis.shape[1]:
                write_pgm(outdir / f"basis_L_k{k:02d}.pgm",
                          basis[:, k - 1].reshape(sol_shape))
            if k <= resid_basis.shape[1]:
                write_pgm(outdir / f"basis_D_k{k:02d}.pgm",
                          resid_basis[:, k - 1].reshape(data_shape))
    return 0


def cmd_compare(config):
    op, b, x_true, _, _ = build_problem(config)
    if x_true is None:
        raise UsageError("compare needs a problem with a known truth")
    hybrid = config.method.startswith("hybrid")
    base_lu = "hybrid_lslu" if hybrid else "lslu"
    base_qr = "hybrid_lsqr" if hybrid else "lsqr"

    curves = []
    cfg_full = make_solver_config(config, x_true, method=base_lu,
                                  pivot=PivotStrategy.full())
    curves.append((f"{base_lu}_full", solve(op, b, cfg_full)))
    limit = max(op.nrows, op.ncols)
    for size in config.sample_sizes:
        if size > limit:
            print(f"skipping sample size {size}: exceeds max(m, n) = {limit}",
                  file=sys.stderr)
            continue
        cfg_s = make_solver_config(
            config, x_true, method=base_lu,
            pivot=PivotStrategy.sampled(size, seed=config.pivot_seed))
        curves.append((f"{base_lu}_s{size}", solve(op, b, cfg_s)))
    curves.append((base_qr, solve(op, b, make_solver_config(
        config, x_true, method=base_qr))))

    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    kmax = max(res.k_reached for _, res in curves)
    rows = []
    for i in range(kmax):
        row = [i + 1]
        for _, res in curves:
            row.append(res.relative_errors[i] if i < len(res.relative_errors)
                       else float("nan"))
        rows.append(row)
    write_csv(outdir / "compare.csv",
              ["k"] + [f"rel_error_{name}" for name, _ in curves], rows)
    return 0


def cmd_uq(config):
    op, b, x_true, e, shapes = build_problem(config)
    if e is None:
        raise UsageError("uq needs a generated problem (known noise)")
    m = op.nrows
    sigma2 = config.sigma2
    if sigma2 is None:
        sigma2 = float(np.dot(e, e) / m)
    reg = config.reg
    k_stop = None
    if reg is None or "solution" in shapes:
        # the automatically-stopped hybrid baseline supplies the default
        # regularization scale and the iteration for the variance images
        hybrid = run_hybrid_lsqr(op, b, SolverConfig(
            method="hybrid_lsqr", maxiter=config.maxiter,
            lambda_rule=LambdaRule.wgcv(),
            stop_tol=config.stop_tol if config.stop_tol is not None else 1e-4,
            track_truth=x_true))
        k_stop = hybrid.k_stop
        if reg is None:
            if k_stop < 1:
                raise UsageError("cannot derive reg: hybrid run produced no iterations")
            reg = float(hybrid.lambdas[k_stop - 1])
    if reg <= 0:
        raise UsageError("reg must be positive")

    k_max = config.k_max
    hstate = hess_run(op, b, strategy=make_pivot(config), maxiter=k_max)
    gstate = gk_run(op, b, maxiter=k_max)
    kk = min(hstate.k, gstate.k, k_max)
    rows = []
    last = None
    for k in range(1, kk + 1):
        uq_h = build_uq(hstate, sigma2, reg, k=k)
        uq_g = build_uq_bidiag(gstate, sigma2, reg, k=k)
        s_h, s_g = covariance_sum(uq_h), covariance_sum(uq_g)
        rows.append((k, s_h, s_g, abs(s_h - s_g)))
        last = (uq_h, uq_g)

    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_csv(outdir / "uq.csv", ["k", "sum_lslu", "sum_lsqr", "abs_diff"], rows)
    if "solution" in shapes and last is not None:
        k_star = min(max(k_stop or kk, 1), kk)
        uq_h = build_uq(hstate, sigma2, reg, k=k_star)
        uq_g = build_uq_bidiag(gstate, sigma2, reg, k=k_star)
        write_pgm(outdir / "variance_lslu.pgm",
                  variance_diagonal(uq_h).reshape(shapes["solution"]))
        write_pgm(outdir / "variance_lsqr.pgm",
                  variance_diagonal(uq_g).reshape(shapes["solution"]))
    return 0


def cmd_bounds(config):
    op, b, _, _, _ = build_problem(config)
    if config.lambda_value is not None:
        report = hybrid_bound_report(op, b, config.lambda_value,
                                     config.maxiter, pivot=make_pivot(config))
    else:
        report = plain_bound_report(op, b, config.maxiter,
                                    pivot=make_pivot(config))
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = zip(report.iterations, report.r_lu, report.r_qr, report.kappa,
               report.lower_ok, report.upper_ok)
    write_csv(outdir / "bounds.csv",
              ["k", "r_lu", "r_qr", "kappa", "lower_ok", "upper_ok"], rows)
    return 0


def _add_common_flags(p):
    p.add_argument("--config", help="JSON file with RunConfig fields")
    p.add_argument("--problem", choices=("gravity", "tomo", "dense_file"))
    p.add_argument("--n", type=int)
    p.add_argument("--depth", type=float)
    p.add_argument("--angles", type=int)
    p.add_argument("--detectors", type=int)
    p.add_argument("--matrix-file")
    p.add_argument("--rhs-file")
    p.add_argument("--noise-level", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--method", choices=("lslu", "hybrid_lslu", "lsqr", "hybrid_lsqr"))
    p.add_argument("--maxiter", type=int)
    p.add_argument("--lambda-rule", choices=("fixed", "gcv", "wgcv", "optimal"))
    p.add_argument("--lambda-value", type=float)
    p.add_argument("--stop-tol", type=float)
    p.add_argument("--pivot", choices=("none", "full", "sampled"))
    p.add_argument("--sample-size", type=int)
    p.add_argument("--pivot-seed", type=int)
    p.add_argument("--sample-sizes", help="comma-separated list for compare")
    p.add_argument("--k-max", type=int)
    p.add_argument("--sigma2", type=float)
    p.add_argument("--reg", type=float)
    p.add_argument("--output-dir")
    p.add_argument("--emit", help="comma-separated subset of " + ",".join(EMIT_CHOICES))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lslu", description="Inner-product-free Krylov solvers for "
        "ill-posed inverse problems")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (("solve", "run one solver, emit history/summary/images"),
                      ("compare", "error curves for pivot variants and the baseline"),
                      ("uq", "posterior covariance sums from both factorizations"),
                      ("bounds", "residual-bound report (fixed lambda: hybrid form)")):
        _add_common_flags(sub.add_parser(name, help=doc))
    return parser


def resolve_config(args):
    config = RunConfig()
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
        known = {f.name for f in fields(RunConfig)}
        for key, value in loaded.items():
            if key not in known:
                raise UsageError(f"unknown config key {key!r}")
            setattr(config, key, value)
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(config, f.name, value)
    if isinstance(config.sample_sizes, str):
        config.sample_sizes = [int(s) for s in config.sample_sizes.split(",") if s]
    if isinstance(config.emit, str):
        config.emit = [s for s in config.emit.split(",") if s]
    for item in config.emit:
        if item not in EMIT_CHOICES:
            raise UsageError(f"unknown emit target {item!r}")
    return config


_COMMANDS = {"solve": cmd_solve, "compare": cmd_compare,
             "uq": cmd_uq, "bounds": cmd_bounds}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        config = resolve_config(args)
        return _COMMANDS[args.command](config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
