"""Univariate real expressions: parsing, symbolic differentiation, evaluation.

The grammar covers decimal literals, the constants pi and e, the variable x,
the functions sin/cos/tan/exp/log/sqrt/abs, and + - * / ^ with ^ binding
tighter than unary minus and associating to the right.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from . import mpreal
from .mpreal import BigReal, DomainError, Precision, make

__all__ = [
    "Expr",
    "Num",
    "Const",
    "Var",
    "Neg",
    "Call",
    "BinOp",
    "ParseError",
    "UnknownIdentifierError",
    "parse",
    "to_text",
    "differentiate",
    "simplify",
    "evaluate",
    "DifferentiableFn",
    "builtin_suite",
    "suite_function",
    "F5_CORRECTED_TEXT",
    "F5_PRINTED_TEXT",
]

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs")
CONSTANTS = ("pi", "e")


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Const, Var, Neg, Call, BinOp]

X = Var()
_ZERO = Num(Fraction(0))
_ONE = Num(Fraction(1))


class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifierError(ParseError):
    pass


_TOKEN_RE = re.compile(
    r"(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, off = self.peek()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", off)
        self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", off)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                e = BinOp(val, e, self.term())
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.advance()
                e = BinOp(val, e, self.factor())
            else:
                return e

    def factor(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.advance()
            return BinOp("^", base, self.factor())
        return base

    def atom(self) -> Expr:
        kind, val, off = self.advance()
        if kind == "num":
            return Num(Fraction(val))
        if kind == "name":
            if val == "x":
                return X
            if val in CONSTANTS:
                return Const(val)
            if val in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(val, arg)
            raise UnknownIdentifierError(f"unknown identifier {val!r}", off)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ParseError(f"unexpected {val!r}" if val else "unexpected end of input", off)


def parse(text: str) -> Expr:
    """Parse text into an expression tree."""
    return _Parser(text).parse()


# -- printing ----------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _print_prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}[e.op]
    if isinstance(e, Neg):
        return _PREC_NEG
    if isinstance(e, Num):
        if e.value < 0:
            return _PREC_NEG
        if e.value.denominator != 1 and not _has_decimal_form(e.value):
            return _PREC_MUL  # printed as p/q
    return _PREC_ATOM


def _has_decimal_form(q: Fraction) -> bool:
    d = q.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    return d == 1


def _num_text(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    if _has_decimal_form(q.value if isinstance(q, Num) else q):
        # exact decimal expansion: scale the numerator to a power of ten
        d = q.denominator
        twos = fives = 0
        while d % 2 == 0:
            d //= 2
            twos += 1
        while d % 5 == 0:
            d //= 5
            fives += 1
        shift = max(twos, fives)
        digits = q.numerator * 10**shift // q.denominator
        s = str(abs(digits)).rjust(shift + 1, "0")
        body = s[:-shift] + "." + s[-shift:] if shift else s
        return ("-" if q < 0 else "") + body
    return f"{q.numerator}/{q.denominator}"


def to_text(e: Expr) -> str:
    """Render an expression; parse(to_text(e)) simplifies back to e."""

    def wrap(child: Expr, limit: int) -> str:
        s = to_text(child)
        return f"({s})" if _print_prec(child) < limit else s

    if isinstance(e, Num):
        return _num_text(e.value)
    if isinstance(e, Const):
        return e.name
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Neg):
        return "-" + wrap(e.arg, _PREC_NEG)
    if isinstance(e, Call):
        return f"{e.fn}({to_text(e.arg)})"
    if isinstance(e, BinOp):
        if e.op in "+-":
            return f"{wrap(e.left, _PREC_ADD)} {e.op} {wrap(e.right, _PREC_ADD + 1)}"
        if e.op in "*/":
            return f"{wrap(e.left, _PREC_MUL)}{e.op}{wrap(e.right, _PREC_MUL + 1)}"
        return f"{wrap(e.left, _PREC_POW + 1)}^{wrap(e.right, _PREC_NEG)}"
    raise TypeError(f"not an expression node: {e!r}")


# -- simplification ----------------------------------------------------


def _is_num(e: Expr, value=None) -> bool:
    return isinstance(e, Num) and (value is None or e.value == value)


def simplify(e: Expr) -> Expr:
    """Safe local cleanup: identity elimination and exact rational folding.

    Deliberately not a rewriting engine; derivative trees stay auditable.
    """
    if isinstance(e, Neg):
        a = simplify(e.arg)
        if isinstance(a, Num):
            return Num(-a.value)
        if isinstance(a, Neg):
            return a.arg
        return Neg(a)
    if isinstance(e, Call):
        return Call(e.fn, simplify(e.arg))
    if not isinstance(e, BinOp):
        return e

    left, right = simplify(e.left), simplify(e.right)
    op = e.op
    if isinstance(left, Num) and isinstance(right, Num):
        folded = _fold(op, left.value, right.value)
        if folded is not None:
            return Num(folded)
    if op == "+":
        if _is_num(left, 0):
            return right
        if _is_num(right, 0):
            return left
        if isinstance(right, Neg):
            return BinOp("-", left, right.arg)
    elif op == "-":
        if _is_num(right, 0):
            return left
        if _is_num(left, 0):
            return simplify(Neg(right))
        if isinstance(right, Neg):
            return BinOp("+", left, right.arg)
    elif op == "*":
        if _is_num(left, 0) or _is_num(right, 0):
            return _ZERO
        if _is_num(left, 1):
            return right
        if _is_num(right, 1):
            return left
    elif op == "/":
        if _is_num(right, 1):
            return left
    elif op == "^":
        if _is_num(right, 1):
            return left
        if _is_num(right, 0) and not _is_num(left, 0):
            return _ONE
    return BinOp(op, left, right)


def _fold(op: str, a: Fraction, b: Fraction):
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b if b != 0 else None
    if op == "^" and b.denominator == 1 and abs(b.numerator) <= 128:
        if a == 0 and b < 0:
            return None
        return a**b.numerator
    return None


# -- differentiation ---------------------------------------------------


def differentiate(e: Expr) -> Expr:
    """Symbolic derivative with respect to x, simplified."""
    return simplify(_derivative(e))


def _derivative(e: Expr) -> Expr:
    if isinstance(e, (Num, Const)):
        return _ZERO
    if isinstance(e, Var):
        return _ONE
    if isinstance(e, Neg):
        return Neg(_derivative(e.arg))
    if isinstance(e, Call):
        u, du = e.arg, _derivative(e.arg)
        rules = {
            "sin": lambda: Call("cos", u),
            "cos": lambda: Neg(Call("sin", u)),
            "tan": lambda: BinOp("/", _ONE, BinOp("^", Call("cos", u), Num(Fraction(2)))),
            "exp": lambda: Call("exp", u),
            "log": lambda: BinOp("/", _ONE, u),
            "sqrt": lambda: BinOp("/", _ONE, BinOp("*", Num(Fraction(2)), Call("sqrt", u))),
            # sign(u) away from zero, expressed inside the grammar
            "abs": lambda: BinOp("/", Call("abs", u), u),
        }
        return BinOp("*", rules[e.fn](), du)
    if isinstance(e, BinOp):
        u, v = e.left, e.right
        du, dv = _derivative(u), _derivative(v)
        if e.op in "+-":
            return BinOp(e.op, du, dv)
        if e.op == "*":
            return BinOp("+", BinOp("*", du, v), BinOp("*", u, dv))
        if e.op == "/":
            num = BinOp("-", BinOp("*", du, v), BinOp("*", u, dv))
            return BinOp("/", num, BinOp("^", v, Num(Fraction(2))))
        if e.op == "^":
            if isinstance(v, Num):
                power_rule = BinOp("*", v, BinOp("^", u, Num(v.value - 1)))
                return BinOp("*", power_rule, du)
            # u^v = exp(v log u); valid for u > 0
            inner = BinOp(
                "+",
                BinOp("*", dv, Call("log", u)),
                BinOp("/", BinOp("*", v, du), u),
            )
            return BinOp("*", e, inner)
    raise TypeError(f"not an expression node: {e!r}")


# -- evaluation --------------------------------------------------------

_CALL_EVAL = {
    "sin": mpreal.sin,
    "cos": mpreal.cos,
    "tan": mpreal.tan,
    "exp": mpreal.exp,
    "log": mpreal.log,
    "sqrt": mpreal.sqrt,
    "abs": abs,
}


def evaluate(e: Expr, x: BigReal) -> BigReal:
    """Evaluate at x, carrying x's precision through every node."""
    precision = x.precision
    if isinstance(e, Num):
        return make(e.value, precision)
    if isinstance(e, Const):
        return mpreal.const_pi(precision) if e.name == "pi" else mpreal.const_e(precision)
    if isinstance(e, Var):
        return x
    if isinstance(e, Neg):
        return -evaluate(e.arg, x)
    if isinstance(e, Call):
        return _CALL_EVAL[e.fn](evaluate(e.arg, x))
    if isinstance(e, BinOp):
        left = evaluate(e.left, x)
        if e.op == "^":
            if isinstance(e.right, Num):
                return mpreal.power(left, e.right.value)
            return mpreal.power(left, evaluate(e.right, x))
        right = evaluate(e.right, x)
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if e.op == "*":
            return left * right
        return left / right
    raise TypeError(f"not an expression node: {e!r}")


# -- packaged function objects ------------------------------------------

_ROOT_DIGITS = 100


@dataclass(frozen=True)
class DifferentiableFn:
    """A function, its symbolic derivative, and an optional root anchor."""

    label: str
    f: Expr
    fprime: Expr
    known_root: BigReal | None = None

    @classmethod
    def from_text(cls, label: str, text: str, known_root: str | None = None):
        f = simplify(parse(text))
        root = make(known_root, Precision(_ROOT_DIGITS)) if known_root is not None else None
        return cls(label=label, f=f, fprime=differentiate(f), known_root=root)

    def value(self, x: BigReal) -> BigReal:
        return evaluate(self.f, x)

    def derivative(self, x: BigReal) -> BigReal:
        return evaluate(self.fprime, x)


# The f5 constant term: the form in circulation ends "+ 8/16", which does
# not vanish at the tabulated root -2 (it leaves exactly 1/34 there);
# "+ 8/17" cancels x^3/(x^4+1) = -8/17 at x = -2 exactly.  The corrected
# constant is the default; the verbatim form stays available for comparison.
F5_CORRECTED_TEXT = "sqrt(x^4+8)*sin(pi/(x^2+2)) + x^3/(x^4+1) - sqrt(6) + 8/17"
F5_PRINTED_TEXT = "sqrt(x^4+8)*sin(pi/(x^2+2)) + x^3/(x^4+1) - sqrt(6) + 8/16"

_SUITE_SPECS = (
    ("f1", "sin(x) - x/100", "0"),
    ("f2", "1/(3*x^4) - x^3 - 1/(3*x) + 1", "1"),
    ("f3", "exp(sin(x)) - 1 - x/5", "0"),
    ("f4", "x + sin(x^2/pi)", "0"),
    ("f5", F5_CORRECTED_TEXT, "-2"),
    ("f6", "cos(x) - x", "0.739085133215160"),
    ("f7", "exp(x) + cos(x)", "-1.7461395304080124"),
)


def builtin_suite(use_printed_f5: bool = False) -> list[DifferentiableFn]:
    """The seven benchmark functions with their tabulated roots."""
    fns = []
    for label, text, root in _SUITE_SPECS:
        if label == "f5" and use_printed_f5:
            text = F5_PRINTED_TEXT
        fns.append(DifferentiableFn.from_text(label, text, root))
    return fns


def suite_function(label: str, use_printed_f5: bool = False) -> DifferentiableFn:
    for fn in builtin_suite(use_printed_f5=use_printed_f5):
        if fn.label == label:
            return fn
    raise KeyError(f"no builtin function {label!r}")
