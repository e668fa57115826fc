"""Arbitrary-precision real arithmetic with an explicit precision contract.

Values are immutable ``BigReal`` objects: an MPFR number tagged with the
``Precision`` it was computed at.  Mixed-precision arithmetic rounds at the
larger of the two operand precisions; the rounding context is derived from
the operands, never from process-global state, so values are safe to share
across threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import gmpy2

__all__ = [
    "DEFAULT_DIGITS",
    "Precision",
    "BigReal",
    "NumericError",
    "FormatError",
    "DomainError",
    "DivisionByZeroError",
    "make",
    "elementary",
    "format_paper",
    "signed_real_pow",
    "sqrt",
    "sin",
    "cos",
    "tan",
    "exp",
    "log",
    "power",
    "const_pi",
    "const_e",
    "to_decimal",
]

#: Working precision used when callers do not specify one.  The deepest
#: residuals in the bundled reference tables reach ~1e-1478, so 2048 decimal
#: digits leaves comfortable headroom.
DEFAULT_DIGITS = 2048

_LOG2_10 = math.log2(10)
_GUARD_BITS = 8
_DECIMAL_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?\Z")


class NumericError(Exception):
    """Base class for arithmetic-layer errors."""


class FormatError(NumericError):
    """Text could not be parsed as a decimal literal."""


class DomainError(NumericError):
    """Argument outside the mathematical domain of an operation."""


class DivisionByZeroError(NumericError):
    """Division by an exact zero.

    Kept distinct from :class:`DomainError` so iteration drivers can map it
    to a degenerate-step outcome rather than a usage error.
    """


@dataclass(frozen=True, order=True)
class Precision:
    """Number of significant decimal digits carried by a computation."""

    decimal_digits: int

    def __post_init__(self) -> None:
        if not isinstance(self.decimal_digits, int):
            raise TypeError("decimal_digits must be an int")
        if self.decimal_digits < 50:
            raise ValueError("precision below 50 decimal digits is not supported")

    @property
    def bits(self) -> int:
        return math.ceil(self.decimal_digits * _LOG2_10) + _GUARD_BITS

    def tol(self, margin: int = 10) -> "BigReal":
        """10^-(decimal_digits - margin), the standard guard threshold."""
        return make(f"1e-{self.decimal_digits - margin}", self)


@lru_cache(maxsize=None)
def _context(bits: int) -> gmpy2.context:
    return gmpy2.context(precision=bits)


def _max_precision(a: Precision, b: Precision) -> Precision:
    return a if a.decimal_digits >= b.decimal_digits else b


class BigReal:
    """An immutable real number at a fixed decimal precision."""

    __slots__ = ("value", "precision")

    def __init__(self, value, precision: Precision):
        object.__setattr__(self, "precision", precision)
        object.__setattr__(self, "value", gmpy2.mpfr(value, precision.bits))

    def __setattr__(self, name, _value):
        raise AttributeError(f"BigReal is immutable, cannot set {name!r}")

    # -- introspection -------------------------------------------------

    def is_nan(self) -> bool:
        return gmpy2.is_nan(self.value)

    def is_finite(self) -> bool:
        return gmpy2.is_finite(self.value)

    def is_zero(self) -> bool:
        return gmpy2.is_zero(self.value)

    def is_integral(self) -> bool:
        return gmpy2.is_finite(self.value) and gmpy2.is_integer(self.value)

    def sign(self) -> int:
        if self.is_nan():
            raise DomainError("sign of NaN is undefined")
        return gmpy2.sign(self.value)

    def at_precision(self, precision: Precision) -> "BigReal":
        """Re-round to another working precision."""
        return BigReal(self.value, precision)

    # -- arithmetic ----------------------------------------------------

    def _binary(self, other, op: str, reverse: bool = False):
        other = _coerce(other, self.precision)
        if other is NotImplemented:
            return NotImplemented
        a, b = (other, self) if reverse else (self, other)
        prec = _max_precision(a.precision, b.precision)
        if op == "div" and b.value == 0:
            raise DivisionByZeroError("division by zero")
        ctx = _context(prec.bits)
        return BigReal(getattr(ctx, op)(a.value, b.value), prec)

    def __add__(self, other):
        return self._binary(other, "add")

    def __radd__(self, other):
        return self._binary(other, "add", reverse=True)

    def __sub__(self, other):
        return self._binary(other, "sub")

    def __rsub__(self, other):
        return self._binary(other, "sub", reverse=True)

    def __mul__(self, other):
        return self._binary(other, "mul")

    def __rmul__(self, other):
        return self._binary(other, "mul", reverse=True)

    def __truediv__(self, other):
        return self._binary(other, "div")

    def __rtruediv__(self, other):
        return self._binary(other, "div", reverse=True)

    def __pow__(self, exponent):
        if not isinstance(exponent, int):
            raise TypeError("** takes an int exponent; use power() or signed_real_pow()")
        if exponent < 0 and self.value == 0:
            raise DivisionByZeroError("zero raised to a negative power")
        ctx = _context(self.precision.bits)
        return BigReal(ctx.pow(self.value, exponent), self.precision)

    def __neg__(self):
        # minus/abs go through an explicit context: bare operators would
        # round at the process-global (53-bit) context instead.
        ctx = _context(self.precision.bits)
        return BigReal(ctx.minus(self.value), self.precision)

    def __pos__(self):
        return self

    def __abs__(self):
        ctx = _context(self.precision.bits)
        return BigReal(ctx.abs(self.value), self.precision)

    # -- comparison ----------------------------------------------------

    def _cmp_operand(self, other):
        if isinstance(other, BigReal):
            return other.value
        if isinstance(other, int):
            return other
        if isinstance(other, Fraction):
            return gmpy2.mpq(other)
        return None

    def __eq__(self, other):
        v = self._cmp_operand(other)
        return NotImplemented if v is None else self.value == v

    def __lt__(self, other):
        v = self._cmp_operand(other)
        return NotImplemented if v is None else self.value < v

    def __le__(self, other):
        v = self._cmp_operand(other)
        return NotImplemented if v is None else self.value <= v

    def __gt__(self, other):
        v = self._cmp_operand(other)
        return NotImplemented if v is None else self.value > v

    def __ge__(self, other):
        v = self._cmp_operand(other)
        return NotImplemented if v is None else self.value >= v

    __hash__ = None  # mutable-feeling numerics; identity by value is a trap

    # -- conversion ----------------------------------------------------

    def __float__(self) -> float:
        return float(self.value)

    def __str__(self) -> str:
        return to_decimal(self)

    def __repr__(self) -> str:
        return f"BigReal({to_decimal(self, 12)!r}, digits={self.precision.decimal_digits})"


def _coerce(x, precision: Precision):
    if isinstance(x, BigReal):
        return x
    if isinstance(x, int):
        return BigReal(x, precision)
    if isinstance(x, Fraction):
        return BigReal(gmpy2.mpq(x), precision)
    if isinstance(x, float):
        raise TypeError(
            "refusing to mix float into arbitrary-precision arithmetic; "
            "pass a string, int or Fraction"
        )
    return NotImplemented


def make(value, precision: Precision) -> BigReal:
    """Build a BigReal from a decimal literal, int or Fraction.

    Text may use plain or scientific notation and is rounded correctly to
    the requested precision.
    """
    if isinstance(value, BigReal):
        return value.at_precision(precision)
    if isinstance(value, str):
        if not _DECIMAL_RE.match(value.strip()):
            raise FormatError(f"not a decimal literal: {value!r}")
        return BigReal(gmpy2.mpfr(value.strip(), precision.bits), precision)
    if isinstance(value, (int, Fraction)):
        coerced = _coerce(value, precision)
        return coerced.at_precision(precision)
    raise FormatError(f"cannot build a BigReal from {type(value).__name__}")


# -- elementary functions ----------------------------------------------


def _unary(fn_name: str, x: BigReal) -> BigReal:
    ctx = _context(x.precision.bits)
    return BigReal(getattr(ctx, fn_name)(x.value), x.precision)


def sqrt(x: BigReal) -> BigReal:
    if x.value < 0:
        raise DomainError("sqrt of a negative value")
    return _unary("sqrt", x)


def sin(x: BigReal) -> BigReal:
    return _unary("sin", x)


def cos(x: BigReal) -> BigReal:
    return _unary("cos", x)


def tan(x: BigReal) -> BigReal:
    return _unary("tan", x)


def exp(x: BigReal) -> BigReal:
    return _unary("exp", x)


def log(x: BigReal) -> BigReal:
    if x.value <= 0:
        raise DomainError("log of a non-positive value")
    return _unary("log", x)


def power(base: BigReal, exponent) -> BigReal:
    """General real power with principal-branch semantics.

    Integer exponents work for any base; fractional exponents require a
    positive base (use :func:`signed_real_pow` for odd-root semantics on
    negative bases).
    """
    if isinstance(exponent, int):
        return base**exponent
    if isinstance(exponent, Fraction):
        if exponent.denominator == 1:
            return base ** int(exponent)
        return signed_real_pow(base, exponent)
    if isinstance(exponent, BigReal):
        if exponent.is_integral():
            return base ** int(gmpy2.mpz(exponent.value))
        if base.value < 0:
            raise DomainError("negative base with non-integer exponent")
        if base.value == 0:
            if exponent.value < 0:
                raise DivisionByZeroError("zero base, negative exponent")
            return BigReal(0, base.precision)
        prec = _max_precision(base.precision, exponent.precision)
        ctx = _context(prec.bits)
        return BigReal(ctx.pow(base.value, exponent.value), prec)
    raise TypeError(f"unsupported exponent type {type(exponent).__name__}")


def signed_real_pow(base: BigReal, exponent) -> BigReal:
    """Rational power using the sign-preserving real-root convention.

    For negative bases the exponent's reduced denominator must be odd, and
    the result is sign(base)^p * |base|^(p/q).  This keeps weights such as
    ((2f(x)-3f(y))/f(x))^(-2/3) real-valued when the bracket goes negative.
    """
    q = Fraction(exponent)
    if q.denominator == 1:
        return base ** q.numerator
    if base.value == 0:
        if q > 0:
            return BigReal(0, base.precision)
        raise DivisionByZeroError("zero base, negative exponent")
    negative = base.value < 0
    if negative and q.denominator % 2 == 0:
        raise DomainError(
            f"negative base with even root denominator {q.denominator}"
        )
    # exp((p/q) log |base|) with a few guard digits, rounded back at the end
    work = Precision(base.precision.decimal_digits + 5)
    ctx = _context(work.bits)
    magnitude = ctx.exp(ctx.mul(gmpy2.mpq(q), ctx.log(ctx.abs(base.value))))
    if negative and q.numerator % 2 != 0:
        magnitude = ctx.minus(magnitude)
    return BigReal(magnitude, base.precision)


_UNARY_KINDS = {
    "neg": lambda x: -x,
    "abs": abs,
    "sqrt": sqrt,
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "exp": exp,
    "log": log,
}
_BINARY_KINDS = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
    "pow": power,
}


def elementary(kind: str, *args: BigReal) -> BigReal:
    """Apply a named elementary operation; see _UNARY_KINDS/_BINARY_KINDS."""
    if kind in _UNARY_KINDS:
        (x,) = args
        return _UNARY_KINDS[kind](x)
    if kind in _BINARY_KINDS:
        a, b = args
        return _BINARY_KINDS[kind](a, b)
    raise ValueError(f"unknown operation kind {kind!r}")


def const_pi(precision: Precision) -> BigReal:
    return BigReal(_context(precision.bits).const_pi(), precision)


def const_e(precision: Precision) -> BigReal:
    return BigReal(_context(precision.bits).exp(1), precision)


# -- formatting --------------------------------------------------------


def format_paper(x: BigReal, sig_figs: int = 3) -> str:
    """Render |x| as ``0.MMMe±E`` with sig_figs mantissa digits; 0 -> "0"."""
    if sig_figs < 1:
        raise ValueError("sig_figs must be >= 1")
    if x.is_nan():
        return "nan"
    if not x.is_finite():
        return "inf"
    if x.is_zero():
        return "0"
    digits, exp10, _ = x.value.digits(10, sig_figs)
    return f"0.{digits.lstrip('-')}e{exp10:+d}"


def to_decimal(x: BigReal, max_digits: int | None = None) -> str:
    """Plain scientific-notation decimal string, full precision by default."""
    if x.is_nan():
        return "nan"
    if not x.is_finite():
        return "-inf" if x.value < 0 else "inf"
    if x.is_zero():
        return "0"
    n = max_digits or x.precision.decimal_digits
    digits, exp10, _ = x.value.digits(10, n)
    sign_, mantissa = ("-", digits[1:]) if digits.startswith("-") else ("", digits)
    mantissa = mantissa.rstrip("0") or "0"
    if len(mantissa) == 1:
        return f"{sign_}{mantissa}e{exp10 - 1:+d}"
    return f"{sign_}{mantissa[0]}.{mantissa[1:]}e{exp10 - 1:+d}"
