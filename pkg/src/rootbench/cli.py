"""Command-line interface: ad-hoc solves, benchmark tables, method listing.

Exit codes: 0 success/converged, 1 usage or input error, 2 non-convergence
(divergence, degenerate step, or iteration budget exhausted).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import bench, driver, methods
from .exprlang import DifferentiableFn, ParseError, differentiate, parse
from .mpreal import (
    DEFAULT_DIGITS,
    FormatError,
    NumericError,
    Precision,
    format_paper,
    make,
    to_decimal,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _param_pair(text: str):
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError("expected key=value")
    try:
        return key.strip(), Fraction(value.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad value for {key!r}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="rootbench", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve f(x)=0 from a starting point")
    solve.add_argument("--expr", required=True, help="expression in x, e.g. 'cos(x)-x'")
    solve.add_argument("--x0", required=True, help="starting point (decimal literal)")
    solve.add_argument("--method", default="jc8", help="method id (see 'methods')")
    solve.add_argument("--digits", type=int, default=DEFAULT_DIGITS)
    solve.add_argument("--max-iter", type=int, default=50)
    solve.add_argument("--tol", default=None, help="residual tolerance (default 1e-digits/2)")
    solve.add_argument(
        "--param", action="append", type=_param_pair, default=[], metavar="KEY=VALUE",
        help="method parameter override (gamma, beta, lam, mu, b)",
    )
    solve.add_argument("--format", choices=("text", "csv", "json"), default="text")

    table = sub.add_parser("table", help="recompute a benchmark table")
    table.add_argument("--table", required=True, help="table number 2..8, or 'all'")
    table.add_argument("--digits", type=int, default=DEFAULT_DIGITS)
    table.add_argument("--format", choices=("text", "csv", "json"), default="text")
    table.add_argument("--diff", action="store_true", help="compare against the reference fixture")
    table.add_argument(
        "--f5-printed", action="store_true",
        help="use the verbatim f5 constant 8/16 instead of the corrected 8/17",
    )

    listing = sub.add_parser("methods", help="list registered methods")
    listing.add_argument("--format", choices=("text", "json"), default="text")
    return top


def _cmd_solve(args) -> int:
    precision = Precision(args.digits)
    try:
        expr = parse(args.expr)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        x0 = make(args.x0, precision)
        tol = make(args.tol, precision) if args.tol else None
        methods.descriptor(args.method)
    except (FormatError, methods.UnknownMethodError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    fn = DifferentiableFn(label=args.expr, f=expr, fprime=differentiate(expr))
    config = (
        driver.RunConfig(args.method, fn, x0, precision, max_iters=args.max_iter,
                         residual_tol=tol, params=dict(args.param))
        if tol is not None
        else driver.RunConfig.with_default_tol(
            args.method, fn, x0, precision, max_iters=args.max_iter, params=dict(args.param)
        )
    )
    try:
        trace = driver.run(config)
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    report = None
    try:
        report = driver.coc(trace)
    except (driver.InsufficientIteratesError, driver.IllConditionedError):
        pass

    _emit_solve(args, trace, report)
    return EXIT_OK if trace.status is driver.RunStatus.CONVERGED else EXIT_NOT_CONVERGED


def _emit_solve(args, trace, report) -> None:
    desc = methods.descriptor(args.method)
    if args.format == "json":
        doc = {
            "method_id": trace.method_id,
            "status": trace.status.value,
            "iterations": len(trace.iterates) - 1,
            "iterates": [to_decimal(x, 30) for x in trace.iterates],
            "residuals": [format_paper(r) for r in trace.residuals],
            "final_coc": report.final_coc if report else None,
            "efficiency_index": float(driver.efficiency_index(
                desc.claimed_order, desc.fn_evals_per_iter + desc.deriv_evals_per_iter)),
            "fn_evals": trace.total_fn_evals,
            "deriv_evals": trace.total_deriv_evals,
        }
        print(json.dumps(doc, indent=2))
        return
    if args.format == "csv":
        print("iter,x,residual")
        for k, (x, r) in enumerate(zip(trace.iterates, trace.residuals)):
            print(f"{k},{to_decimal(x, 30)},{format_paper(r)}")
        return
    print(f"method: {desc.display_name} ({desc.id}), claimed order {desc.claimed_order}")
    for k, (x, r) in enumerate(zip(trace.iterates, trace.residuals)):
        print(f"  k={k:<3d} x={to_decimal(x, 30):<40s} |f(x)|={format_paper(r)}")
    print(f"status: {trace.status.value}")
    print(f"evaluations: {trace.total_fn_evals} function, {trace.total_deriv_evals} derivative")
    ei = driver.efficiency_index(desc.claimed_order, desc.fn_evals_per_iter + desc.deriv_evals_per_iter)
    print(f"efficiency index: {to_decimal(ei, 6)}")
    if report is not None:
        print(f"computational order of convergence: {report.final_coc:.3f}")
    if trace.status is not driver.RunStatus.CONVERGED:
        print("warning: did not converge", file=sys.stderr)


def _cmd_table(args) -> int:
    if args.table == "all":
        numbers = bench.TABLE_NUMBERS
    else:
        try:
            numbers = (int(args.table),)
        except ValueError:
            print(f"error: bad table {args.table!r}", file=sys.stderr)
            return EXIT_USAGE
        if numbers[0] not in bench.TABLE_SETUP:
            print(f"error: table must be in {bench.TABLE_NUMBERS}", file=sys.stderr)
            return EXIT_USAGE
    precision = Precision(args.digits)
    for n in numbers:
        produced = bench.reproduce_table(n, precision, use_printed_f5=args.f5_printed)
        if args.format == "text":
            sys.stdout.write(bench.render_text(produced))
        elif args.format == "csv":
            sys.stdout.write(bench.render_csv(produced))
        else:
            sys.stdout.write(bench.render_json(produced))
        if args.diff:
            diff = bench.diff_against_reference(produced, bench.load_reference(n))
            sys.stdout.write(bench.render_diff_text(diff))
        sys.stdout.write("\n")
    return EXIT_OK


def _cmd_methods(args) -> int:
    rows = []
    for d in methods.registry():
        ei = driver.efficiency_index(d.claimed_order, d.fn_evals_per_iter + d.deriv_evals_per_iter)
        rows.append(
            {
                "id": d.id,
                "name": d.display_name,
                "order": d.claimed_order,
                "fn_evals": d.fn_evals_per_iter,
                "deriv_evals": d.deriv_evals_per_iter,
                "efficiency_index": to_decimal(ei, 6),
                "params": {k: str(v) for k, v in d.params.items()},
                "note": d.note,
            }
        )
    if args.format == "json":
        print(json.dumps(rows, indent=2))
        return EXIT_OK
    for r in rows:
        params = ", ".join(f"{k}={v}" for k, v in r["params"].items())
        line = (
            f"{r['id']:11s} order {r['order']}  "
            f"evals {r['fn_evals']}f+{r['deriv_evals']}d  EI {r['efficiency_index']}"
        )
        if params:
            line += f"  [{params}]"
        if r["note"]:
            line += f"  ({r['note']})"
        print(line)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"solve": _cmd_solve, "table": _cmd_table, "methods": _cmd_methods}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
