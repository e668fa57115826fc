#!/usr/bin/env python3
"""Measure the computational order of convergence across the benchmark suite.

Prints a methods-by-functions matrix of COC estimates from high-precision
runs with refined roots.  Degenerate benchmark functions (vanishing f'' or
f''' at the root) push the observed order above the nominal one; that is a
property of the functions, not an implementation artifact.

Usage:
    python scripts/verify_orders.py [--digits 4096] [--methods jc8,newton,...]
"""

import argparse
import sys
from fractions import Fraction

from rootbench.bench import TABLE_SETUP
from rootbench.driver import IllConditionedError, RunConfig, coc, run
from rootbench.exprlang import builtin_suite
from rootbench.mpreal import Precision, make

DEFAULT_ROWS = (
    ("newton", {}, 6),
    ("kung4", {"beta": Fraction(-1, 2)}, 5),
    ("kung4", {"beta": Fraction(0)}, 5),
    ("kung4", {"beta": Fraction(1)}, 5),
    ("jc8", {}, 4),
)
X0 = {label: x0 for _, (label, x0) in TABLE_SETUP.items()}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--digits", type=int, default=4096)
    ap.add_argument("--methods", default=None,
                    help="comma-separated method ids (default: newton, kung4 x3, jc8)")
    ap.add_argument("--iters", type=int, default=4)
    args = ap.parse_args()

    precision = Precision(args.digits)
    if args.methods:
        rows = [(m.strip(), {}, args.iters) for m in args.methods.split(",")]
    else:
        rows = DEFAULT_ROWS

    suite = {fn.label: fn for fn in builtin_suite()}
    labels = sorted(suite)
    header = "method".ljust(22) + "".join(lbl.rjust(9) for lbl in labels)
    print(header)
    print("-" * len(header))
    for method_id, params, iters in rows:
        name = method_id + ("".join(f"({k}={v})" for k, v in params.items()))
        cells = []
        for lbl in labels:
            cfg = RunConfig(method_id, suite[lbl], make(X0[lbl], precision),
                            precision, max_iters=iters, params=params)
            try:
                cells.append(f"{coc(run(cfg)).final_coc:9.3f}")
            except IllConditionedError:
                cells.append("      ---")
        print(name.ljust(22) + "".join(cells))
    return 0


if __name__ == "__main__":
    sys.exit(main())
