"""Arbitrary-precision root finding: multipoint iterations and benchmarks."""

__version__ = "0.1.0"

from .mpreal import BigReal, Precision, DEFAULT_DIGITS, make  # noqa: F401
from .exprlang import DifferentiableFn, builtin_suite, parse  # noqa: F401
from .methods import registry, descriptor  # noqa: F401
from .driver import RunConfig, run, coc, efficiency_index  # noqa: F401
from .bench import reproduce_table, load_reference, diff_against_reference  # noqa: F401
