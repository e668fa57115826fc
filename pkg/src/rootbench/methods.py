"""The iteration-scheme registry.

Each step function advances one iterate x -> x_{n+1} for a differentiable
function, reporting the intermediate points and the evaluations spent.
Comparison schemes are implemented verbatim from their published forms,
including forms that look mistranscribed; those carry a note and are
excluded from strict table acceptance downstream.

Any intermediate whose residual already sits below the working guard
threshold short-circuits the step (early exit); all denominators are
guarded and raise DegenerateStepError instead of dividing through noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .divdiff import NodeTriple, dd1, dd2_confluent, dd2_distinct, hermite_deriv_at_z
from .exprlang import DifferentiableFn
from .mpreal import BigReal, NumericError, Precision, make, signed_real_pow

__all__ = [
    "DegenerateStepError",
    "UnknownMethodError",
    "StepResult",
    "MethodDescriptor",
    "registry",
    "descriptor",
    "step_newton",
    "step_kung4",
    "step_jc8",
    "step_bi1",
    "step_bi2",
    "step_bi3",
    "step_bi4",
    "step_sharma1",
    "step_sharma2",
    "step_sharma3",
    "step_thukral",
    "step_wang",
    "step_sargolzaei",
    "step_cordero",
    "step_soleymani1",
    "step_soleymani2",
    "step_kim",
]


class DegenerateStepError(NumericError):
    """A guarded denominator (or derivative) vanished at working precision."""


class UnknownMethodError(KeyError):
    pass


@dataclass(frozen=True)
class StepResult:
    next: BigReal
    intermediates: tuple = ()
    early_exit: bool = False
    fn_evals: int = 0
    deriv_evals: int = 0


@dataclass(frozen=True)
class MethodDescriptor:
    """A registered scheme: step rule plus its bookkeeping."""

    id: str
    display_name: str
    claimed_order: int
    fn_evals_per_iter: int
    deriv_evals_per_iter: int
    step: Callable[..., StepResult]
    params: Mapping[str, Fraction] = field(default_factory=dict)
    note: str | None = None

    def run_step(self, fn: DifferentiableFn, x: BigReal, precision: Precision, **overrides) -> StepResult:
        merged = dict(self.params)
        merged.update(overrides)
        return self.step(fn, x, precision, **merged)


class _Step:
    """Shared bookkeeping for one iteration step."""

    def __init__(self, fn: DifferentiableFn, x: BigReal, precision: Precision):
        self.fn = fn
        self.x = x.at_precision(precision)
        self.precision = precision
        self.tol = precision.tol(10)
        self.fn_evals = 0
        self.deriv_evals = 0
        self.points: list[tuple[str, BigReal]] = []

    def f(self, t: BigReal) -> BigReal:
        self.fn_evals += 1
        return self.fn.value(t)

    def df(self, t: BigReal) -> BigReal:
        self.deriv_evals += 1
        return self.fn.derivative(t)

    def intermediate(self, label: str, t: BigReal) -> None:
        self.points.append((label, t))

    def guard(self, v: BigReal, what: str) -> BigReal:
        if v.is_nan() or abs(v) <= self.tol:
            raise DegenerateStepError(f"{what} vanished at working precision")
        return v

    def converged(self, ft: BigReal) -> bool:
        return abs(ft) <= self.tol

    def exit_at(self, t: BigReal) -> StepResult:
        return StepResult(
            next=t,
            intermediates=tuple(self.points),
            early_exit=True,
            fn_evals=self.fn_evals,
            deriv_evals=self.deriv_evals,
        )

    def finish(self, t: BigReal) -> StepResult:
        return StepResult(
            next=t,
            intermediates=tuple(self.points),
            early_exit=False,
            fn_evals=self.fn_evals,
            deriv_evals=self.deriv_evals,
        )


def _open(fn, x, precision):
    """Start a step: evaluate f(x) and bail out if x is already a root."""
    s = _Step(fn, x, precision)
    fx = s.f(s.x)
    return s, fx


def _newton_point(s: _Step, fx: BigReal):
    dfx = s.guard(s.df(s.x), "f'(x)")
    y = s.x - fx / dfx
    s.intermediate("y", y)
    return dfx, y


def step_newton(fn, x, precision: Precision) -> StepResult:
    """x - f(x)/f'(x)."""
    s, fx = _open(fn, x, precision)
    if s.converged(fx):
        return s.exit_at(s.x)
    dfx = s.guard(s.df(s.x), "f'(x)")
    return s.finish(s.x - fx / dfx)


def step_kung4(fn, x, precision: Precision, beta=Fraction(-1, 2)) -> StepResult:
    """Fourth-order two-step family with weight (f+b*fy)/(f+(b-2)*fy)."""
    s, fx = _open(fn, x, precision)
    if s.converged(fx):
        return s.exit_at(s.x)
    beta = make(Fraction(beta), precision)
    dfx, y = _newton_point(s, fx)
    fy = s.f(y)
    if s.converged(fy):
        return s.exit_at(y)
    den = s.guard(fx + (beta - 2) * fy, "f(x)+(beta-2)f(y)")
    z = y - (fx + beta * fy) / den * (fy / dfx)
    return s.finish(z)


def _kung_half_z(s: _Step, fx, dfx, y, fy):
    """z for the beta = -1/2 member, in its scaled (2f-fy)/(2f-5fy) form."""
    den = s.guard(2 * fx - 5 * fy, "2f(x)-5f(y)")
    return y - (2 * fx - fy) / den * (fy / dfx)


def step_jc8(fn, x, precision: Precision) -> StepResult:
    """Three-step eighth-order scheme closing with f(z)/H'(z)."""
    s, fx = _open(fn, x, precision)
    if s.converged(fx):
        return s.exit_at(s.x)
    dfx, y = _newton_point(s, fx)
    fy = s.f(y)
    if s.converged(fy):
        return s.exit_at(y)
    z = _kung_half_z(s, fx, dfx, y, fy)
    s.intermediate("z", z)
    fz = s.f(z)
    if s.converged(fz):
        return s.exit_at(z)
    nodes = NodeTriple(s.x, y, z, fx, fy, fz, dfx)
    hp = s.guard(hermite_deriv_at_z(nodes), "H'(z)")
    return s.finish(z - fz / hp)


def _bi_third_step(s: _Step, fx, dfx, y, fy, z, gamma):
    fz = s.f(z)
    if s.converged(fz):
        return s.exit_at(z)
    den = s.guard(
        dd1(z, fz, y, fy) + dd2_confluent(z, s.x, fz, fx, dfx) * (z - y),
        "f[z,y]+f[z,x,x](z-y)",
    )
    wden = s.guard(fx + gamma * fz, "f(x)+gamma*f(z)")
    w = (fx + (gamma + 2) * fz) / wden
    return s.finish(z - w * (fz / den))


def step_bi1(fn, x, precision: Precision, gamma=Fraction(1)) -> StepResult:
    s, fx = _open(fn, x, precision)
    if s.converged(fx):
        return s.exit_at(s.x)
    gamma = make(Fraction(gamma), precision)
    dfx, y = _newton_point(s, fx)
    fy = s.f(y)
    if s.converged(fy):
        return s.exit_at(y)
    z = _kung_half_z(s, fx, dfx, y, fy)
    s.intermediate("z", z)
    return _bi_third_step(s, fx, dfx, y, fy, z, gamma)


def step_bi2(fn, x, precision: Precision, gamma=Fraction(1)) -> StepResult:
    s, fx = _open(fn, x, precision)
    if s.converged(fx):
        return s.exit_at(s.x)
    gamma = make(Fraction(gamma), precision)
    dfx, y = _newton_point(s, fx)
    fy = s.f(y)
    if s.converged(fy):
        return s.exit_at(y)
    u = fy / fx
    z = y - (1 + (2 * fy) / (2 * fx) + 5 * u**2 + u**3) * (fy / dfx)
    s.intermediate("z", z)
    return _bi_third_step(s, fx, dfx, y, fy, z, gamma)


def step_bi3(fn, x, precision: Precision, gamma=Fraction(1)) -> StepResult:
    s, fx = _open(fn, x, precision)
    if s.converged(fx):
        return s.exit_at(s.x)
    gamma = make(Fraction(gamma), precision)
    dfx, y = _newton_point(s, fx)
    fy = s.f(y)
    if s.converged(fy):
        return s.exit_at(y)
    u = fy / fx
    bracket = s.guard(1 - (2 * fy) / (2 * fx) - u**2 + u**3, "z-step bracket")
    z = y - (fy / dfx) / bracket
    s.intermediate("z", z)
    return _bi_third_step(s, fx, dfx, y, fy, z, gamma)


def step_bi4(fn, x, precision: Precision, gamma=Fraction(1)) -> StepResult:
    s, fx = _open(fn, x, precision)
    if s.converged(fx):
        return s.exit_at(s.x)
    gamma = make(Fraction(gamma), precision)
    dfx, y = _newton_point(s, fx)
    fy = s.f(y)
    if s.converged(fy):
        return s.exit_at(y)
    bracket = s.guard((2 * fx - 3 * fy) / fx, "z-step bracket")
    z = y - signed_real_pow(bracket, Fraction(-2, 3)) * (fy / dfx)
    s.intermediate("z", z)
    return _bi_third_step(s, fx, dfx, y, fy, z, gamma)


def _sharma_open(s: _Step, fx):
    dfx, y = _newton_point(s, fx)
    fy = s.f(y)
    if s.converged(fy):
        return None, (dfx, y, fy, None)
    den = s.guard(fx - 2 * fy, "f(x)-2f(y)")
    z = y - fx / den * (fy / dfx)
    s.intermediate("z", z)
    fz = s.f(z)
    return z, (dfx, y, fy, fz)


def _sharma_close(s: _Step, fx, y, fy, z, fz, weight):
    den = s.guard(
        dd1(y, fy, z, fz) * dd1(s.x, fx, z, fz),
        "f[y,z]*f[x,z]",
    )
    return s.finish(z - weight * (dd1(s.x, fx, y, fy) * fz) / den)


def step_sharma1(fn, x, precision: Precision, gamma=Fraction(1)) -> StepResult:
    s, fx = _open(fn, x, precision)
    if s.converged(fx):
        return s.exit_at(s.x)
    gamma = make(Fraction(gamma), precision)
    z, (dfx, y, fy, fz) = _sharma_open(s, fx)
    if z is None:
        return s.exit_at(y)
    if s.converged(fz):
        return s.exit_at(z)
    v = fz / fx
    return _sharma_close(s, fx, y, fy, z, fz, 1 + v + gamma * v**2)


def step_sharma2(fn, x, precision: Precision, gamma=Fraction(1)) -> StepResult:
    s, fx = _open(fn, x, precision)
    if s.converged(fx):
        return s.exit_at(s.x)
    gamma = make(Fraction(gamma), precision)
    z, (dfx, y, fy, fz) = _sharma_open(s, fx)
    if z is None:
        return s.exit_at(y)
    if s.converged(fz):
        return s.exit_at(z)
    wden = s.guard(fx + gamma * fz, "f(x)+gamma*f(z)")
    return _sharma_close(s, fx, y, fy, z, fz, (fx + (gamma + 1) * fz) / wden)


def step_sharma3(fn, x, precision: Precision, gamma=Fraction(1)) -> StepResult:
    gamma = Fraction(gamma)
    if gamma == 0:
        raise DegenerateStepError("gamma = 0 leaves the weight exponent undefined")
    s, fx = _open(fn, x, precision)
    if s.converged(fx):
        return s.exit_at(s.x)
    gamma_b = make(gamma, precision)
    z, (dfx, y, fy, fz) = _sharma_open(s, fx)
    if z is None:
        return s.exit_at(y)
    if s.converged(fz):
        return s.exit_at(z)
    base = s.guard(1 + gamma_b * (fz / fx), "1+gamma*f(z)/f(x)")
    weight = signed_real_pow(base, 1 / gamma)
    return _sharma_close(s, fx, y, fy, z, fz, weight)


def step_thukral(fn, x, precision: Precision) -> StepResult:
    s, fx = _open(fn, x, precision)
    if s.converged(fx):
        return s.exit_at(s.x)
    dfx, y = _newton_point(s, fx)
    fy = s.f(y)
    if s.converged(fy):
        return s.exit_at(y)
    den = s.guard(dfx * (fx - fy), "f'(x)(f(x)-f(y))")
    z = s.x - (fx**2 + fy**2) / den
    s.intermediate("z", z)
    fz = s.f(z)
    if s.converged(fz):
        return s.exit_at(z)
    mu = fy / fx
    one_minus = s.guard(1 - mu, "1-mu")
    w = ((1 + mu**2) / one_minus) ** 2 - 2 * mu**2 - 6 * mu**3 + fz / s.guard(fy, "f(y)") + 4 * (fz / fx)
    return s.finish(z - w * (fz / dfx))


def step_wang(fn, x, precision: Precision) -> StepResult:
    s, fx = _open(fn, x, precision)
    if s.converged(fx):
        return s.exit_at(s.x)
    dfx, y = _newton_point(s, fx)
    fy = s.f(y)
    if s.converged(fy):
        return s.exit_at(y)
    zden = s.guard(2 * dd1(s.x, fx, y, fy) - dfx, "2f[x,y]-f'(x)")
    z = y - fy / zden
    s.intermediate("z", z)
    fz = s.f(z)
    if s.converged(fz):
        return s.exit_at(z)
    den = s.guard(
        2 * dd1(s.x, fx, z, fz)
        + dd1(y, fy, z, fz)
        - 2 * dd1(s.x, fx, y, fy)
        + (y - z) * dd2_confluent(y, s.x, fy, fx, dfx),
        "H'(z)",
    )
    return s.finish(z - fz / den)


def step_sargolzaei(fn, x, precision: Precision) -> StepResult:
    s, fx = _open(fn, x, precision)
    if s.converged(fx):
        return s.exit_at(s.x)
    dfx, y = _newton_point(s, fx)
    fy = s.f(y)
    if s.converged(fy):
        return s.exit_at(y)
    z = y - (1 + fy / fx) ** 2 * (fy / dfx)
    s.intermediate("z", z)
    fz = s.f(z)
    if s.converged(fz):
        return s.exit_at(z)
    den = s.guard(
        2 * dd1(z, fz, s.x, fx)
        + dd1(z, fz, y, fy)
        - 2 * dd1(y, fy, s.x, fx)
        + (y - z) * dd2_confluent(y, s.x, fy, fx, dfx),
        "H'(z)",
    )
    return s.finish(z - fz / den)


def step_cordero(fn, x, precision: Precision) -> StepResult:
    """Three-stage scheme; the closing step reuses f(z) as published."""
    s, fx = _open(fn, x, precision)
    if s.converged(fx):
        return s.exit_at(s.x)
    dfx, y = _newton_point(s, fx)
    fy = s.f(y)
    if s.converged(fy):
        return s.exit_at(y)
    ratio = (fx - fy) / s.guard(fx - 2 * fy, "f(x)-2f(y)")
    z = s.x - (fx / dfx) * ratio
    s.intermediate("z", z)
    fz = s.f(z)
    if s.converged(fz):
        return s.exit_at(z)
    u = z - (fz / dfx) * (ratio + fz / (2 * s.guard(fy - 2 * fz, "f(y)-2f(z)"))) ** 2
    s.intermediate("u", u)
    return s.finish(u - 3 * (fz / dfx) * ((u - z) / s.guard(y - s.x, "y-x")))


def step_soleymani1(fn, x, precision: Precision) -> StepResult:
    """Derivative-weighted two-stage scheme; y is the Newton point."""
    s, fx = _open(fn, x, precision)
    if s.converged(fx):
        return s.exit_at(s.x)
    dfx, y = _newton_point(s, fx)
    dfy = s.guard(s.df(y), "f'(y)")
    z = s.x - (1 - Fraction(3, 8) * (dfy**2 - dfx**2) / dfy**2) * (fx / dfx)
    s.intermediate("z", z)
    fz = s.f(z)
    if s.converged(fz):
        return s.exit_at(z)
    den = s.guard(
        dfy + 2 * dd2_confluent(z, s.x, fz, fx, dfx) * (z - y),
        "f'(y)+2f[z,x,x](z-y)",
    )
    return s.finish(z - fz / den)


def step_soleymani2(fn, x, precision: Precision) -> StepResult:
    """Arithmetic-mean-of-derivatives scheme; y is the Newton point."""
    s, fx = _open(fn, x, precision)
    if s.converged(fx):
        return s.exit_at(s.x)
    dfx, y = _newton_point(s, fx)
    dfy = s.df(y)
    mean2 = s.guard(dfx + dfy, "f'(x)+f'(y)")
    z = s.x - 2 * fx / mean2
    s.intermediate("z", z)
    fz = s.f(z)
    if s.converged(fz):
        return s.exit_at(z)
    k = z - fz / s.guard(dfy, "f'(y)")
    s.intermediate("k", k)
    fk = s.f(k)
    if s.converged(fk):
        return s.exit_at(k)
    den = s.guard(dfx * (3 * dfy - dfx) / mean2, "f'(x)(3f'(y)-f'(x))/(f'(x)+f'(y))")
    return s.finish(k - fk / den)


def step_kim(fn, x, precision: Precision, lam=Fraction(0), mu=Fraction(0), b=Fraction(4)) -> StepResult:
    """Rational-weight family; beta = (lam - mu - 2/3)/2, a = -2, c = -3, d = b - 3."""
    lam, mu, b = Fraction(lam), Fraction(mu), Fraction(b)
    beta = (lam - mu - Fraction(2, 3)) / 2
    a, c, d = Fraction(-2), Fraction(-3), b - 3
    s, fx = _open(fn, x, precision)
    if s.converged(fx):
        return s.exit_at(s.x)
    dfx, y = _newton_point(s, fx)
    fy = s.f(y)
    if s.converged(fy):
        return s.exit_at(y)
    u = fy / fx
    zden = s.guard(1 + (beta - 2) * u + mu * u**2, "z-step denominator")
    z = y - (1 + beta * u + lam * u**2) / zden * (fy / dfx)
    s.intermediate("z", z)
    fz = s.f(z)
    if s.converged(fz):
        return s.exit_at(z)
    v = fz / fx
    wden = s.guard(1 + c * u + d * v, "1+c*u+d*v")
    den = s.guard(
        dfx + dd2_distinct(y, s.x, z, fy, fx, fz) * (z - s.x),
        "f'(x)+f[y,x,z](z-x)",
    )
    return s.finish(z - (1 + a * u + b * v) / wden * (fz / den))


_VERBATIM_NOTE = "implemented verbatim from a published form that looks mistranscribed"

_DESCRIPTORS = (
    MethodDescriptor("newton", "Newton", 2, 1, 1, step_newton),
    MethodDescriptor("kung4", "Kung two-step family", 4, 2, 1, step_kung4, {"beta": Fraction(-1, 2)}),
    MethodDescriptor("jc8", "JC8 (Hermite-closed three-step)", 8, 3, 1, step_jc8),
    MethodDescriptor("bi1", "Bi I", 8, 3, 1, step_bi1, {"gamma": Fraction(1)}),
    MethodDescriptor(
        "bi2", "Bi II", 8, 3, 1, step_bi2, {"gamma": Fraction(1)},
        note=f"{_VERBATIM_NOTE}: z-step weight 1+2f(y)/(2f(x))+5u^2+u^3",
    ),
    MethodDescriptor(
        "bi3", "Bi III", 8, 3, 1, step_bi3, {"gamma": Fraction(1)},
        note=f"{_VERBATIM_NOTE}: inverted z-step bracket 1-2f(y)/(2f(x))-u^2+u^3",
    ),
    MethodDescriptor(
        "bi4", "Bi IV", 8, 3, 1, step_bi4, {"gamma": Fraction(1)},
        note=f"{_VERBATIM_NOTE}: ((2f(x)-3f(y))/f(x))^(-2/3) z-step weight "
        "(odd-root convention keeps it real for negative brackets)",
    ),
    MethodDescriptor("sharma1", "Sharma I", 8, 3, 1, step_sharma1, {"gamma": Fraction(1)}),
    MethodDescriptor("sharma2", "Sharma II", 8, 3, 1, step_sharma2, {"gamma": Fraction(1)}),
    MethodDescriptor("sharma3", "Sharma III", 8, 3, 1, step_sharma3, {"gamma": Fraction(1)}),
    MethodDescriptor(
        "thukral", "Thukral", 8, 3, 1, step_thukral,
        note=f"{_VERBATIM_NOTE}: unprinted first step taken as the Newton point",
    ),
    MethodDescriptor("wang", "Wang", 8, 3, 1, step_wang),
    MethodDescriptor("sargolzaei", "Sargolzaei", 8, 3, 1, step_sargolzaei),
    MethodDescriptor(
        "cordero", "Cordero", 8, 3, 1, step_cordero,
        note=f"{_VERBATIM_NOTE}: closing step reuses f(z) where f(u) would be expected",
    ),
    MethodDescriptor(
        "soleymani1", "Soleymani I", 8, 2, 2, step_soleymani1,
        note=f"{_VERBATIM_NOTE}: unprinted first step taken as the Newton point",
    ),
    MethodDescriptor(
        "soleymani2", "Soleymani II", 8, 3, 2, step_soleymani2,
        note=f"{_VERBATIM_NOTE}: unprinted first step taken as the Newton point",
    ),
    MethodDescriptor(
        "kim", "Kim", 8, 3, 1, step_kim,
        {"lam": Fraction(0), "mu": Fraction(0), "b": Fraction(4)},
    ),
)

_BY_ID = {d.id: d for d in _DESCRIPTORS}
assert len(_BY_ID) == len(_DESCRIPTORS), "duplicate method ids"


def registry() -> tuple[MethodDescriptor, ...]:
    """All registered schemes, in a stable order."""
    return _DESCRIPTORS


def descriptor(method_id: str) -> MethodDescriptor:
    try:
        return _BY_ID[method_id]
    except KeyError:
        raise UnknownMethodError(method_id) from None
