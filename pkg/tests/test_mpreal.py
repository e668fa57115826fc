import math
import random
from fractions import Fraction

import gmpy2
import pytest
from hypothesis import given, strategies as st

from rootbench.mpreal import (
    BigReal,
    DivisionByZeroError,
    DomainError,
    FormatError,
    Precision,
    const_pi,
    cos,
    elementary,
    exp,
    format_paper,
    log,
    make,
    power,
    sin,
    signed_real_pow,
    sqrt,
    to_decimal,
)

P100 = Precision(100)
P2048 = Precision(2048)


class TestPrecision:
    def test_minimum_digits(self):
        with pytest.raises(ValueError):
            Precision(49)
        Precision(50)

    def test_binary_bits_cover_decimal_digits(self):
        for d in (50, 100, 2048, 4096):
            assert Precision(d).bits >= math.ceil(d * math.log2(10))

    def test_non_int_rejected(self):
        with pytest.raises(TypeError):
            Precision(100.0)


class TestMake:
    def test_exact_decimal(self):
        x = make("1.5", P100)
        assert x == Fraction(3, 2)

    def test_table_root_literal(self):
        x = make("0.739085133215160", P100)
        # cos(x) - x at the 15-digit anchor is small but nonzero
        assert abs(cos(x) - x) < make("1e-14", P100)

    def test_deep_exponent(self):
        x = make("1e-1478", P2048)
        assert x > 0

    def test_integer_and_fraction(self):
        assert make(7, P100) == 7
        assert make(Fraction(1, 4), P100) == Fraction(1, 4)

    @pytest.mark.parametrize("bad", ["abc", "nan", "inf", "1..2", "", "0x10", "1e"])
    def test_format_errors(self, bad):
        with pytest.raises(FormatError):
            make(bad, P100)

    def test_float_rejected_in_arithmetic(self):
        with pytest.raises(TypeError):
            make("1", P100) + 0.25


class TestArithmetic:
    def test_mixed_precision_uses_larger(self):
        small = make("1", Precision(100))
        tiny = make("1e-150", Precision(300))
        total = small + tiny
        assert total.precision.decimal_digits == 300
        assert total != small  # the tiny part survives at 300 digits

    def test_division_by_zero_is_catchable(self):
        with pytest.raises(DivisionByZeroError):
            make("1", P100) / make("0", P100)

    def test_int_exponent_pow(self):
        assert make("-2", P100) ** 3 == -8
        with pytest.raises(DivisionByZeroError):
            make(0, P100) ** -1

    def test_nan_and_inf_detectable(self):
        nan = BigReal(gmpy2.mpfr("nan"), P100)
        inf = make("1", P100) * BigReal(gmpy2.mpfr("inf"), P100)
        assert nan.is_nan() and not nan.is_finite()
        assert not inf.is_finite() and not inf.is_nan()

    def test_immutability(self):
        x = make("1", P100)
        with pytest.raises(AttributeError):
            x.value = 2


class TestElementary:
    def test_sin_zero(self):
        assert sin(make(0, P100)).is_zero()

    def test_fixed_point_residual(self):
        r = make("0.739085133215160", P100)
        assert abs(elementary("sub", elementary("cos", r), r)) < make("1e-14", P100)

    def test_quarter_power_of_eight(self):
        got = elementary("pow", make(8, P100), make("0.25", P100))
        oracle = exp(log(make(8, P100)) / 4)
        assert abs(got - oracle) <= make("1e-95", P100)
        assert to_decimal(got, 6).startswith("1.68179")

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            sqrt(make(-1, P100))
        with pytest.raises(DomainError):
            log(make(0, P100))
        with pytest.raises(DomainError):
            power(make(-2, P100), make("0.5", P100))

    def test_exp_log_roundtrip_random(self):
        rng = random.Random(1234)
        for _ in range(25):
            x = make(f"{rng.randint(1, 10**9)}e-{rng.randint(0, 9)}", P100)
            assert abs(exp(log(x)) - x) <= make("1e-95", P100) * x

    def test_precision_monotonicity_sample(self):
        def compute(p):
            x = make("1.7", p)
            return sin(x) + sqrt(make(2, p)) * exp(make("0.3", p))

        lo, hi = compute(Precision(100)), compute(Precision(200))
        assert abs(lo - hi.at_precision(Precision(100))) <= make("1e-95", P100)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            elementary("cot", make(1, P100))


class TestGlobalContextIndependence:
    def test_results_ignore_global_context(self):
        # thread-global gmpy2 precision must never leak into BigReal math
        saved = gmpy2.get_context().precision
        try:
            reference = -sin(make("1.5", P100)) - 1
            gmpy2.get_context().precision = 24
            polluted = -sin(make("1.5", P100)) - 1
        finally:
            gmpy2.get_context().precision = saved
        assert reference == polluted
        assert abs(polluted) > 1  # full-precision value, not a 24-bit stub


class TestFormatPaper:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("3.36e-666", "0.336e-665"),
            ("-6.54e-61", "0.654e-60"),
            ("0", "0"),
            ("0.165", "0.165e+0"),
            ("2.13", "0.213e+1"),
            ("1e-1478", "0.100e-1477"),
        ],
    )
    def test_examples(self, text, expected):
        assert format_paper(make(text, P2048), 3) == expected

    def test_sig_figs_validation(self):
        with pytest.raises(ValueError):
            format_paper(make("1", P100), 0)

    @given(
        mantissa=st.integers(min_value=100, max_value=999),
        exponent=st.integers(min_value=-2000, max_value=2000),
    )
    def test_roundtrip(self, mantissa, exponent):
        text = f"0.{mantissa}e{exponent:+d}"
        assert format_paper(make(text, P2048), 3) == text


class TestSignedRealPow:
    def test_cube_root_of_negative(self):
        assert signed_real_pow(make(-8, P100), Fraction(1, 3)) == -2

    def test_against_exp_log_oracle(self):
        got = signed_real_pow(make(16, P100), Fraction(-2, 3))
        oracle = exp(log(make(16, P100)) * Fraction(-2, 3))
        assert abs(got - oracle) <= make("1e-95", P100)

    def test_identity(self):
        assert signed_real_pow(make(1, P100), Fraction(-2, 3)) == 1

    def test_even_numerator_gives_positive(self):
        got = signed_real_pow(make(-32, P100), Fraction(2, 5))
        assert abs(got - 4) <= make("1e-95", P100)

    def test_even_root_denominator_rejected(self):
        with pytest.raises(DomainError):
            signed_real_pow(make(-8, P100), Fraction(1, 2))

    def test_integer_exponent_shortcut(self):
        assert signed_real_pow(make(-3, P100), Fraction(2)) == 9
