import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from rootbench.exprlang import (
    BinOp,
    Call,
    Const,
    DifferentiableFn,
    Neg,
    Num,
    ParseError,
    UnknownIdentifierError,
    Var,
    builtin_suite,
    differentiate,
    evaluate,
    parse,
    simplify,
    suite_function,
    to_text,
)
from rootbench.mpreal import DomainError, Precision, make, to_decimal

from conftest import SAFE_WINDOWS, random_point

P100 = Precision(100)
X = Var()


def n(v) -> Num:
    return Num(Fraction(v))


class TestParse:
    def test_structure(self):
        assert parse("sin(x)-x/100") == BinOp("-", Call("sin", X), BinOp("/", X, n(100)))

    def test_single_variable(self):
        assert parse("x") == X

    def test_pow_right_associative(self):
        assert evaluate(parse("2^3^2"), make(1, P100)) == 512

    def test_pow_binds_tighter_than_unary_minus(self):
        assert evaluate(parse("-x^2"), make(3, P100)) == -9
        assert evaluate(parse("(-x)^2"), make(3, P100)) == 9

    def test_negative_exponent(self):
        assert evaluate(parse("2^-3"), make(1, P100)) == Fraction(1, 8)

    def test_constants_and_functions(self):
        e = parse("sqrt(x^4+8)*sin(pi/(x^2+2))")
        assert isinstance(e, BinOp) and e.op == "*"

    def test_scientific_literals(self):
        assert parse("1.5e-3") == n(Fraction(3, 2000))

    @pytest.mark.parametrize(
        "text,offset",
        [("cos(x-", 6), ("1 + ", 4), ("(x", 2), ("x )", 2), ("* x", 0)],
    )
    def test_syntax_error_offsets(self, text, offset):
        with pytest.raises(ParseError) as err:
            parse(text)
        assert err.value.offset == offset

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifierError):
            parse("cot(x)")

    def test_unexpected_character(self):
        with pytest.raises(ParseError):
            parse("x % 2")


class TestDifferentiate:
    def test_cos_minus_x(self):
        assert differentiate(parse("cos(x)-x")) == BinOp("-", Neg(Call("sin", X)), n(1))

    def test_exp_plus_cos(self):
        assert differentiate(parse("exp(x)+cos(x)")) == BinOp(
            "-", Call("exp", X), Call("sin", X)
        )

    def test_sin_minus_linear(self):
        assert differentiate(parse("sin(x)-x/100")) == BinOp(
            "-", Call("cos", X), n(Fraction(1, 100))
        )

    def test_power_rule(self):
        d = differentiate(parse("x^3"))
        assert evaluate(d, make(2, P100)) == 12

    def test_abs_away_from_zero(self):
        d = differentiate(parse("abs(x)"))
        assert evaluate(d, make(-5, P100)) == -1
        assert evaluate(d, make(5, P100)) == 1

    def test_general_power(self):
        d = differentiate(parse("x^x"))  # x^x (1 + log x)
        got = evaluate(d, make(2, P100))
        want = evaluate(parse("x^x*(1+log(x))"), make(2, P100))
        assert abs(got - want) <= make("1e-95", P100)

    @pytest.mark.parametrize("label", sorted(SAFE_WINDOWS))
    def test_against_central_differences(self, label, suite):
        fn = suite[label]
        rng = random.Random(hash(label) & 0xFFFF)
        h = make("1e-30", P100)
        for _ in range(5):
            x = random_point(rng, label, P100)
            sym = fn.derivative(x)
            fd = (fn.value(x + h) - fn.value(x - h)) / (2 * h)
            assert abs(sym - fd) <= make("1e-25", P100) * max(abs(sym), make(1, P100))


class TestEvaluate:
    def test_f2_at_root(self):
        f2 = suite_function("f2")
        assert abs(f2.value(make(1, P100))) <= make("1e-95", P100)

    def test_f4_at_zero_exact(self):
        f4 = suite_function("f4")
        assert f4.value(make(0, P100)).is_zero()

    def test_f5_corrected_vanishes_at_minus_two(self):
        # independent check that the corrected constant cancels exactly
        f5 = suite_function("f5")
        assert abs(f5.value(make(-2, P100))) < make("1e-50", P100)

    def test_f5_printed_leaves_one_thirtyfourth(self):
        f5 = suite_function("f5", use_printed_f5=True)
        residue = f5.value(make(-2, P100)) - Fraction(1, 34)
        assert abs(residue) < make("1e-90", P100)

    def test_domain_error_propagates(self):
        with pytest.raises(DomainError):
            evaluate(parse("log(x)"), make(-1, P100))

    def test_precision_follows_argument(self):
        v = evaluate(parse("pi"), make(1, Precision(200)))
        assert v.precision.decimal_digits == 200


class TestBuiltinSuite:
    def test_labels_and_roots(self, suite):
        assert sorted(suite) == [f"f{i}" for i in range(1, 8)]
        assert suite["f1"].known_root.is_zero()
        assert to_decimal(suite["f6"].known_root, 15) == "7.3908513321516e-1"
        assert to_decimal(suite["f7"].known_root, 17) == "-1.7461395304080124e+0"

    def test_root_residuals(self, suite):
        for fn in suite.values():
            root = fn.known_root.at_precision(P100)
            assert abs(fn.value(root)) < make("1e-12", P100), fn.label

    def test_derivatives_attached(self, suite):
        for fn in suite.values():
            assert fn.fprime == differentiate(fn.f)


# -- structural properties ----------------------------------------------

_leaf = st.sampled_from(
    [X, Const("pi"), n(0), n(1), n(2), n(7), n(Fraction(1, 2)), n(Fraction(3, 7))]
)


def _combine(children):
    unary = st.one_of(
        children.map(lambda a: Neg(a)),
        children.map(lambda a: Call("sin", a)),
        children.map(lambda a: Call("cos", a)),
        children.map(lambda a: Call("exp", a)),
    )
    binary = st.tuples(st.sampled_from("+-*"), children, children).map(
        lambda t: BinOp(t[0], t[1], t[2])
    )
    powered = children.map(lambda a: BinOp("^", a, n(2)))
    return st.one_of(unary, binary, powered)


exprs = st.recursive(_leaf, _combine, max_leaves=12)


class TestRoundTripAndSimplify:
    @given(exprs)
    def test_parse_print_roundtrip(self, e):
        assert simplify(parse(to_text(e))) == simplify(e)

    @given(exprs, st.integers(min_value=-300, max_value=300))
    def test_simplify_preserves_value(self, e, scaled):
        x = make(Fraction(scaled, 100), P100)
        a = evaluate(e, x)
        b = evaluate(simplify(e), x)
        assert abs(a - b) <= make("1e-90", P100) * max(abs(a), make(1, P100))

    def test_structural_equality(self):
        assert n(Fraction(2, 4)) == n(Fraction(1, 2))
        assert parse("sin(x)+1") == parse("sin(x) + 1")
        assert parse("sin(x)+1") != parse("1+sin(x)")

    def test_fraction_printing(self):
        assert to_text(n(Fraction(1, 3))) == "1/3"
        assert to_text(n(Fraction(1, 100))) == "0.01"
        assert to_text(n(Fraction(-3, 2))) == "-1.5"
        # left-associative parse makes the bare form unambiguous
        assert to_text(BinOp("*", n(Fraction(1, 3)), X)) == "1/3*x"
        assert to_text(BinOp("/", X, n(Fraction(1, 3)))) == "x/(1/3)"
