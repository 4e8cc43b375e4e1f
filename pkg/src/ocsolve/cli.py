"""Command-line front end: pick a problem and method, solve, and emit a
trajectory CSV plus a JSON run report for external plotting.

Exit codes: 0 when every requested solver converged, 2 on non-convergence,
1 on usage or I/O errors (including unknown problems and flags).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .direct import DirectConfig, DirectResult, solve_direct
from .problems import UnknownProblemError, available_problems, registry_lookup
from .sweep import SweepConfig, SweepResult, check_callbacks, sweep_solve

USAGE_ERROR = 1
NOT_CONVERGED = 2

_SWEEP_MAX_ITER = 500
_DIRECT_MAX_ITER = 5000


@dataclass
class RunRequest:
    """Parsed invocation: what to solve, how, and where outputs go."""

    problem: str = "rubella"
    method: str = "sweep"
    n_intervals: int = 3000
    tol: float = 1e-3
    grad_tol: float = 1e-6
    max_iter: int | None = None
    relaxation: float = 0.5
    seed: int = 0
    overrides: dict[str, float] = field(default_factory=dict)
    out_path: str = "solution.csv"
    report_path: str = "report.json"


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; 2 is reserved here for
    # solver non-convergence, so usage problems map to exit 1 instead.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="solve",
        description="Solve a bundled optimal control problem by the forward-backward "
        "sweep method, by direct Euler transcription, or by both.",
        epilog="available problems: " + ", ".join(available_problems()),
    )
    parser.add_argument("--problem", default="rubella", help="registry problem name (default: rubella)")
    parser.add_argument(
        "--method",
        default="sweep",
        choices=("sweep", "direct", "both"),
        help="solution method (default: sweep)",
    )
    parser.add_argument("--steps", type=int, default=3000, help="number of grid intervals N (default: 3000)")
    parser.add_argument("--tol", type=float, default=1e-3, help="sweep relative convergence tolerance (default: 1e-3)")
    parser.add_argument(
        "--grad-tol", type=float, default=1e-6, help="direct projected-gradient stopping tolerance (default: 1e-6)"
    )
    parser.add_argument(
        "--max-iter",
        type=int,
        default=None,
        help=f"iteration cap (default: {_SWEEP_MAX_ITER} for sweep, {_DIRECT_MAX_ITER} for direct)",
    )
    parser.add_argument("--relax", type=float, default=0.5, help="sweep control relaxation weight in (0,1] (default: 0.5)")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a problem parameter (repeatable), e.g. --set A=250",
    )
    parser.add_argument("--out", default="solution.csv", help="trajectory CSV path (default: solution.csv)")
    parser.add_argument("--report", default="report.json", help="run report JSON path (default: report.json)")
    parser.add_argument(
        "--seed", type=int, default=0, help="seed for the pre-solve callback consistency check (default: 0)"
    )
    return parser


def parse_request(argv: list[str] | None = None) -> RunRequest:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.steps < 2:
        parser.error("--steps must be at least 2")
    overrides: dict[str, float] = {}
    for item in ns.overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            parser.error(f"--set expects KEY=VALUE, got {item!r}")
        try:
            overrides[key] = float(raw)
        except ValueError:
            parser.error(f"--set value for {key!r} is not a number: {raw!r}")
    return RunRequest(
        problem=ns.problem,
        method=ns.method,
        n_intervals=ns.steps,
        tol=ns.tol,
        grad_tol=ns.grad_tol,
        max_iter=ns.max_iter,
        relaxation=ns.relax,
        seed=ns.seed,
        overrides=overrides,
        out_path=ns.out,
        report_path=ns.report,
    )


def _fmt(value: float) -> str:
    return format(value, ".17g")


def _write_csv(path: str, n_states: int, nodes, states, adjoints, control) -> None:
    """Trajectory table: t, x1..xn, lambda1..lambdan, u1..um.

    Adjoint cells are left empty when the run produced none (direct method).
    """
    n_controls = control.shape[1]
    header = (
        ["t"]
        + [f"x{k + 1}" for k in range(n_states)]
        + [f"lambda{k + 1}" for k in range(n_states)]
        + [f"u{k + 1}" for k in range(n_controls)]
    )
    lines = [",".join(header)]
    for i in range(len(nodes)):
        cells = [_fmt(nodes[i])]
        cells += [_fmt(v) for v in states[i, :n_states]]
        cells += [_fmt(v) for v in adjoints[i]] if adjoints is not None else [""] * n_states
        cells += [_fmt(v) for v in control[i]]
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _sweep_record(result: SweepResult, wall_ms: float) -> dict:
    return {
        "objective": result.objective,
        "iterations": result.iterations,
        "converged": result.converged,
        "pmp_residual": result.pmp_residual,
        "wall_ms": wall_ms,
    }


def _direct_record(result: DirectResult, wall_ms: float) -> dict:
    return {
        "objective": result.objective,
        "iterations": result.iterations,
        "converged": result.converged,
        "projected_grad_norm": result.projected_grad_norm,
        "wall_ms": wall_ms,
    }


def run(request: RunRequest) -> int:
    """Execute the request; returns the process exit code."""
    try:
        spec = registry_lookup(request.problem)
        problem, callbacks = spec.build(request.overrides)
    except (UnknownProblemError, ValueError) as exc:
        message = exc.args[0] if exc.args else str(exc)
        print(f"solve: error: {message}", file=sys.stderr)
        return USAGE_ERROR

    run_sweep = request.method in ("sweep", "both")
    run_direct = request.method in ("direct", "both")
    report: dict = {
        "problem": request.problem,
        "method": request.method,
        "n_intervals": request.n_intervals,
    }

    sweep_result = None
    if run_sweep:
        check = check_callbacks(problem, callbacks, n_samples=100, seed=request.seed)
        if check.adjoint_rel_err > 1e-5 or check.stationarity_resid > 1e-6:
            print(
                "solve: error: PMP callbacks are inconsistent with their Hamiltonian "
                f"(adjoint rel err {check.adjoint_rel_err:.3e}, stationarity {check.stationarity_resid:.3e})",
                file=sys.stderr,
            )
            return USAGE_ERROR
        cfg = SweepConfig(
            n_intervals=request.n_intervals,
            tol=request.tol,
            relaxation=request.relaxation,
            max_iter=request.max_iter if request.max_iter is not None else _SWEEP_MAX_ITER,
        )
        start = time.perf_counter()
        sweep_result = sweep_solve(problem, callbacks, cfg)
        report["sweep"] = _sweep_record(sweep_result, 1e3 * (time.perf_counter() - start))

    direct_result = None
    if run_direct:
        cfg = DirectConfig(
            n_intervals=request.n_intervals,
            grad_tol=request.grad_tol,
            max_iter=request.max_iter if request.max_iter is not None else _DIRECT_MAX_ITER,
        )
        start = time.perf_counter()
        direct_result = solve_direct(problem, cfg)
        report["direct"] = _direct_record(direct_result, 1e3 * (time.perf_counter() - start))

    if run_sweep and run_direct:
        j_s, j_d = sweep_result.objective, direct_result.objective
        report["cross"] = {
            # relative difference with a unit floor so near-zero objectives stay meaningful
            "objective_rel_diff": abs(j_d - j_s) / max(1.0, abs(j_s)),
            "control_max_abs_diff": float(np.max(np.abs(sweep_result.control - direct_result.control))),
        }

    try:
        if sweep_result is not None:
            grid = sweep_result.grid
            _write_csv(
                request.out_path,
                problem.n_states,
                grid.nodes,
                sweep_result.states,
                sweep_result.adjoints,
                sweep_result.control,
            )
        else:
            grid = direct_result.grid
            _write_csv(
                request.out_path,
                problem.n_states,
                grid.nodes,
                direct_result.states,
                None,
                direct_result.control,
            )
        with open(request.report_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        print(f"solve: error: cannot write output: {exc}", file=sys.stderr)
        return USAGE_ERROR

    converged = all(r.converged for r in (sweep_result, direct_result) if r is not None)
    return 0 if converged else NOT_CONVERGED


def main(argv: list[str] | None = None) -> int:
    try:
        request = parse_request(argv)
    except SystemExit as exc:  # argparse --help exits 0, usage errors exit 1
        return int(exc.code or 0)
    return run(request)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
