"""Iteration orchestration: run a method, trace it, measure its order.

A run iterates until the residual tolerance is met, the iteration budget is
spent, an iterate escapes the divergence bound, or a step degenerates.
Residual-tolerance ``None`` runs exactly ``max_iters`` iterations, the mode
used for table reproduction.

The computational order of convergence (COC) is estimated per window as
ln(|e_{k+1}|/|e_k|) / ln(|e_k|/|e_{k-1}|) from errors against a root refined
to working precision (or from successive differences when no root is known);
the reported value is the last well-conditioned window.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

from . import methods as methods_mod
from .divdiff import DegenerateNodesError
from .exprlang import DifferentiableFn
from .mpreal import (
    BigReal,
    DivisionByZeroError,
    DomainError,
    Precision,
    exp,
    log,
    make,
    power,
)

__all__ = [
    "RunStatus",
    "RunConfig",
    "IterationTrace",
    "ConvergenceReport",
    "InsufficientIteratesError",
    "IllConditionedError",
    "CountingFn",
    "run",
    "coc",
    "efficiency_index",
    "refine_root",
]

_DEGENERATE = (
    methods_mod.DegenerateStepError,
    DegenerateNodesError,
    DivisionByZeroError,
    DomainError,
)


class RunStatus(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max-iters"
    DIVERGED = "diverged"
    DEGENERATE_STEP = "degenerate-step"


class InsufficientIteratesError(ValueError):
    pass


class IllConditionedError(ValueError):
    """No COC window had shrinking, representable error ratios."""


@dataclass(frozen=True)
class RunConfig:
    method_id: str
    fn: DifferentiableFn
    x0: BigReal
    precision: Precision
    max_iters: int = 50
    residual_tol: BigReal | None = None  # None: run exactly max_iters
    divergence_bound: int = 10**10
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.residual_tol is not None and not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if not self.divergence_bound > 1:
            raise ValueError("divergence_bound must exceed 1")

    @classmethod
    def with_default_tol(cls, method_id, fn, x0, precision, **kwargs):
        """Open-ended solve: stop at |f| <= 10^-(digits/2)."""
        tol = make(f"1e-{precision.decimal_digits // 2}", precision)
        return cls(method_id, fn, x0, precision, residual_tol=tol, **kwargs)


@dataclass
class IterationTrace:
    method_id: str
    iterates: list[BigReal]
    residuals: list[BigReal]
    errors: list[BigReal] | None
    status: RunStatus
    total_fn_evals: int
    total_deriv_evals: int
    precision: Precision
    fn_label: str = ""
    diverged_at: int | None = None  # index of first out-of-bounds iterate


@dataclass
class ConvergenceReport:
    coc_sequence: list[float | None]
    final_coc: float
    efficiency_index: float
    asymptotic_constant_estimate: BigReal | None = None


class CountingFn:
    """Wrap a DifferentiableFn and count boundary crossings."""

    def __init__(self, fn: DifferentiableFn):
        self.inner = fn
        self.fn_evals = 0
        self.deriv_evals = 0

    @property
    def label(self):
        return self.inner.label

    @property
    def known_root(self):
        return self.inner.known_root

    def value(self, x):
        self.fn_evals += 1
        return self.inner.value(x)

    def derivative(self, x):
        self.deriv_evals += 1
        return self.inner.derivative(x)


def refine_root(fn: DifferentiableFn, precision: Precision, anchor: BigReal | None = None) -> BigReal:
    """Polish the function's root anchor to working precision by Newton."""
    if anchor is None:
        anchor = fn.known_root
    if anchor is None:
        raise ValueError(f"{fn.label or 'function'} has no known root to refine")
    x = anchor.at_precision(precision)
    target = precision.tol(5)
    for _ in range(64):
        fx = fn.value(x)
        if abs(fx) <= target or fx.is_nan():
            break
        dfx = fn.derivative(x)
        if dfx.is_nan() or abs(dfx) <= precision.tol(10):
            break
        x = x - fx / dfx
    return x


def run(config: RunConfig) -> IterationTrace:
    """Iterate a registered method from x0 and record the full trace."""
    desc = methods_mod.descriptor(config.method_id)
    precision = config.precision
    bound = config.divergence_bound
    fn = config.fn

    alpha = None
    if fn.known_root is not None:
        alpha = refine_root(fn, precision)

    x = config.x0.at_precision(precision)
    residual = abs(fn.value(x))
    iterates, residuals = [x], [residual]
    errors = [abs(x - alpha)] if alpha is not None else None
    fn_evals = deriv_evals = 0
    status = RunStatus.MAX_ITERS
    diverged_at = None

    def out_of_bounds(value: BigReal) -> bool:
        return value.is_nan() or abs(value) > bound

    if config.residual_tol is not None and residual <= config.residual_tol:
        status = RunStatus.CONVERGED
    elif out_of_bounds(x) or out_of_bounds(residual):
        status, diverged_at = RunStatus.DIVERGED, 0
    else:
        for _ in range(config.max_iters):
            try:
                step = desc.run_step(fn, x, precision, **config.params)
            except _DEGENERATE:
                status = RunStatus.DEGENERATE_STEP
                break
            fn_evals += step.fn_evals
            deriv_evals += step.deriv_evals
            x = step.next
            try:
                residual = abs(fn.value(x))
            except _DEGENERATE:
                status = RunStatus.DEGENERATE_STEP
                break
            iterates.append(x)
            residuals.append(residual)
            if errors is not None:
                errors.append(abs(x - alpha))
            if out_of_bounds(x) or out_of_bounds(residual):
                status, diverged_at = RunStatus.DIVERGED, len(iterates) - 1
                break
            if config.residual_tol is not None and residual <= config.residual_tol:
                status = RunStatus.CONVERGED
                break

    return IterationTrace(
        method_id=config.method_id,
        iterates=iterates,
        residuals=residuals,
        errors=errors,
        status=status,
        total_fn_evals=fn_evals,
        total_deriv_evals=deriv_evals,
        precision=precision,
        fn_label=fn.label,
        diverged_at=diverged_at,
    )


def _coc_windows(seq: list[BigReal], precision: Precision):
    """Per-window order estimates; None marks an ill-conditioned window."""
    floor = precision.tol(20)
    out: list[float | None] = []
    for k in range(1, len(seq) - 1):
        a, b, c = seq[k - 1], seq[k], seq[k + 1]
        usable = all(v.is_finite() and not v.is_zero() and abs(v) > floor for v in (a, b, c))
        if not usable or not (b < a and c < b):
            out.append(None)
            continue
        out.append(float(log(c / b) / log(b / a)))
    return out


def coc(trace: IterationTrace) -> ConvergenceReport:
    """Computational order of convergence from a trace."""
    if trace.errors is not None:
        if len(trace.iterates) < 3:
            raise InsufficientIteratesError("need at least 3 iterates with a known root")
        seq = trace.errors
        shift = 0
    else:
        if len(trace.iterates) < 4:
            raise InsufficientIteratesError("need at least 4 iterates without a known root")
        seq = [abs(b - a) for a, b in zip(trace.iterates, trace.iterates[1:])]
        shift = 1

    windows = _coc_windows(seq, trace.precision)
    valid = [(i, rho) for i, rho in enumerate(windows) if rho is not None]
    if not valid:
        raise IllConditionedError("every COC window was ill-conditioned")
    last_index, final = valid[-1]

    constant = None
    if trace.errors is not None:
        k = last_index + 1  # rho_k pairs e_{k-1}, e_k, e_{k+1}
        e_k, e_next = seq[k], seq[k + 1]
        # |e_{k+1}| / |e_k|^rho, evaluated in logs to dodge extreme ranges
        work = Precision(64)
        rho = make(repr(float(final)), work)
        constant = exp(log(e_next.at_precision(work)) - rho * log(e_k.at_precision(work)))

    desc = methods_mod.descriptor(trace.method_id)
    evals = desc.fn_evals_per_iter + desc.deriv_evals_per_iter
    ei = float(efficiency_index(desc.claimed_order, evals))
    return ConvergenceReport(
        coc_sequence=windows,
        final_coc=final,
        efficiency_index=ei,
        asymptotic_constant_estimate=constant,
    )


def efficiency_index(order: int, evals: int, precision: Precision | None = None) -> BigReal:
    """order^(1/evals)."""
    if order < 1 or evals < 1:
        raise ValueError("order and evals must be >= 1")
    precision = precision or Precision(64)
    return power(make(order, precision), Fraction(1, evals))
