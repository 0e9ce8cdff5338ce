"""Command-line front end.

Subcommands: ``solve`` runs a distance problem from a problem file and
writes a machine-readable report; ``verify`` rechecks a report's
certificate from raw data, trusting nothing from the solver; ``delta``
prints the essential bound of a tail problem and compares it against the
solved distance.

Exit codes: 0 success; 1 parse/validation failure (message names the
field); 2 solver did not converge (report still written); 3 certificate
rejected by verify; 4 unsupported tail form.

The environment variable CSTAR_APPROX_THREADS is reserved for future use
and ignored in this version.
"""

from __future__ import annotations

import argparse
import sys

from . import io
from .errors import CstarApproxError, ProblemFormatError, UnsupportedForm
from .infinite import delta_ess, dist1_tail, truncated_problem
from .solver import SolveOptions, solve_distance, verify_certificate


def _err(message):
    print(f"error: {message}", file=sys.stderr)


def _merged_options(problem, tol, seed) -> SolveOptions:
    opts = problem.options
    try:
        return SolveOptions(
            tol=tol if tol is not None else opts.tol,
            max_iter=opts.max_iter,
            penalty=opts.penalty,
            seed=seed if seed is not None else opts.seed,
            restarts=opts.restarts,
        )
    except ValueError as exc:
        raise ProblemFormatError("options", str(exc))


def _solve_tail(problem, opts):
    """Solve a tail problem; returns (report, interval, n_used)."""
    if problem.tail_basis is None:
        raise ProblemFormatError("tail.basis", "required for a distance solve")
    if problem.norm == "trace":
        result = dist1_tail(problem.tail_x, problem.tail_basis, opts.tol, opts)
        return result.report, (result.lo, result.hi), result.n_used
    if problem.truncation_n is None:
        raise ProblemFormatError(
            "tail.truncation_n", "required for operator-norm tail problems"
        )
    x_el, basis = truncated_problem(
        problem.tail_x, problem.tail_basis, problem.truncation_n
    )
    report = solve_distance(x_el, basis, "operator", opts)
    return report, None, problem.truncation_n


def cmd_solve(args) -> int:
    try:
        problem = io.load_problem(args.input)
        opts = _merged_options(problem, args.tol, args.seed)
        if problem.is_tail:
            report, interval, n_used = _solve_tail(problem, opts)
        else:
            report = solve_distance(problem.x, problem.basis, problem.norm, opts)
            interval, n_used = None, None
    except CstarApproxError as exc:
        # parse/validation failures, including NoFiniteN and UnsupportedForm
        # from tail problems; solver non-convergence is not an exception
        _err(exc)
        return 1
    payload = io.report_payload(
        report, problem.norm, io.input_digest(args.input),
        interval=interval, truncation_n=n_used,
    )
    io.write_report(args.output, payload)
    print(f"distance = {report.primal_value!r}")
    print(f"gap = {report.gap!r}")
    print(f"converged = {str(report.converged).lower()}")
    if interval is not None:
        print(f"interval = [{interval[0]!r}, {interval[1]!r}]")
    return 0 if report.converged and report.gap <= opts.tol else 2


def cmd_verify(args) -> int:
    try:
        problem = io.load_problem(args.input)
        report = io.load_report(args.report)
    except ProblemFormatError as exc:
        _err(exc)
        return 1

    digest = io.input_digest(args.input)
    if report["input_digest"] != digest:
        _err("input digest does not match the report")
        return 3
    if report["norm"] != problem.norm:
        _err("report norm does not match the problem")
        return 3

    try:
        if problem.is_tail:
            n_used = report.get("truncation_n")
            if not isinstance(n_used, int):
                _err("report.truncation_n: missing for a tail problem")
                return 3
            if problem.tail_basis is None:
                _err("tail.basis: required to verify a distance report")
                return 1
            x_el, basis = truncated_problem(
                problem.tail_x, problem.tail_basis, n_used
            )
        else:
            x_el, basis = problem.x, problem.basis
        cert = io.witness_from_report(report, x_el.signature)
    except ProblemFormatError as exc:
        _err(exc)
        return 1
    if cert is None:
        _err("report carries no certificate")
        return 3

    record = verify_certificate(x_el, basis, cert)
    distance = float(report["distance"])
    gap = distance - record.lower_bound
    print(f"lower_bound = {record.lower_bound!r}")
    print(f"gap = {gap!r}")
    tol = problem.options.tol if args.tol is None else args.tol
    if not record.feasible:
        _err(
            f"certificate infeasible (residual {record.feasibility_residual:.3e}, "
            f"dual norm {record.dual_norm:.12f})"
        )
        return 3
    if abs(record.value - distance) > 10.0 * tol:
        _err(
            f"certificate value {record.value!r} does not match "
            f"distance {distance!r} within 10*tol"
        )
        return 3
    return 0


def cmd_delta(args) -> int:
    try:
        problem = io.load_problem(args.input)
    except ProblemFormatError as exc:
        _err(exc)
        return 1
    if not problem.is_tail:
        _err("delta requires a tail problem file")
        return 4
    try:
        delta = delta_ess(problem.tail_x)
    except UnsupportedForm as exc:
        _err(exc)
        return 4
    print(f"delta = {delta!r}")
    if problem.tail_basis is None:
        return 0
    try:
        opts = _merged_options(problem, args.tol, None)
        report, interval, _ = _solve_tail(problem, opts)
    except UnsupportedForm as exc:
        _err(exc)
        return 4
    except CstarApproxError as exc:
        _err(exc)
        return 1
    distance = report.primal_value
    print(f"distance = {distance!r}")
    slack = 10.0 * opts.tol
    if delta < distance - slack:
        comparison = "strict"
    elif delta > distance + slack:
        comparison = "violated"
    else:
        comparison = "equal"
    print(f"comparison = {comparison}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cstar-approx",
        description=(
            "Distance from a point to a subspace of a block matrix algebra "
            "under the operator or trace norm, with dual certificates."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a problem file, write a report")
    p_solve.add_argument("--input", required=True, help="problem file (JSON)")
    p_solve.add_argument("--output", required=True, help="report file to write")
    p_solve.add_argument("--tol", type=float, default=None, help="gap tolerance")
    p_solve.add_argument("--seed", type=int, default=None, help="multistart seed")
    p_solve.set_defaults(func=cmd_solve)

    p_verify = sub.add_parser("verify", help="recheck a report's certificate")
    p_verify.add_argument("--input", required=True, help="problem file (JSON)")
    p_verify.add_argument("--report", required=True, help="report file to check")
    p_verify.add_argument("--tol", type=float, default=None, help="gap tolerance")
    p_verify.set_defaults(func=cmd_verify)

    p_delta = sub.add_parser(
        "delta", help="essential bound of a tail problem, versus its distance"
    )
    p_delta.add_argument("--input", required=True, help="tail problem file (JSON)")
    p_delta.add_argument("--tol", type=float, default=None, help="gap tolerance")
    p_delta.set_defaults(func=cmd_delta)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
