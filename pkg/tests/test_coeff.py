"""Tests for exact Q[pi] arithmetic and sign decisions."""
from fractions import Fraction

import mpmath
import pytest

from mtp_prover.core.coeff import (
    HALF_PI,
    ONE,
    PI,
    ZERO,
    PiPoly,
    format_rational,
    parse_rational,
    pi_enclosure,
    pipoly_compare,
    pipoly_sign,
    pipoly_sign_with_digits,
    precision_cap,
    precision_tracker,
    rational_bounds,
)
from mtp_prover.services.numeric import numeric_context
from mtp_prover.utils.error_handling import PrecisionError


def random_pipoly(rng, degree: int, bits: int = 30) -> PiPoly:
    """Q[pi] element of the given degree with random 30-bit numerators."""
    numerators = [int(n) or 1 for n in rng.integers(-(2**bits), 2**bits, size=degree + 1)]
    denominators = [int(d) for d in rng.integers(1, 2**10, size=degree + 1)]
    return PiPoly(tuple(Fraction(n, d) for n, d in zip(numerators, denominators)))


class TestRationals:
    """Test cases for rational formatting."""

    def test_format_integral(self):
        """Test integral rationals print without a denominator."""
        assert format_rational(Fraction(3)) == "3"
        assert format_rational(Fraction(-6, 3)) == "-2"

    def test_format_fraction(self):
        """Test reduced n/d output."""
        assert format_rational(Fraction(-2, 4)) == "-1/2"

    def test_parse(self):
        """Test parsing reduces and strips whitespace."""
        assert parse_rational(" 6/4 ") == Fraction(3, 2)
        assert parse_rational("-7") == Fraction(-7)


class TestPiEnclosure:
    """Test cases for rational enclosures of pi."""

    @pytest.mark.parametrize("digits", [1, 5, 20, 60, 150])
    def test_contains_pi(self, digits):
        """Test the enclosure brackets pi with the promised width."""
        enclosure = pi_enclosure(digits)
        with mpmath.workdps(digits + 30):
            pi = mpmath.mpf(mpmath.pi)
            assert mpmath.mpf(enclosure.lo.numerator) / enclosure.lo.denominator < pi
            assert pi < mpmath.mpf(enclosure.hi.numerator) / enclosure.hi.denominator
        assert enclosure.width == Fraction(1, 10**digits)

    def test_nested(self):
        """Test refinements nest inside coarser enclosures."""
        previous = pi_enclosure(1)
        for digits in (2, 4, 8, 16, 32, 64):
            current = pi_enclosure(digits)
            assert previous.contains(current)
            previous = current

    def test_invalid_digits(self):
        """Test zero digits is rejected."""
        with pytest.raises(ValueError):
            pi_enclosure(0)


class TestPiPoly:
    """Test cases for PiPoly arithmetic and display."""

    def test_trailing_zeros_stripped(self):
        """Test canonical form drops trailing zeros."""
        assert PiPoly((Fraction(1), Fraction(0), Fraction(0))) == PiPoly.const(1)
        assert PiPoly((0, 0)).is_zero

    def test_str(self):
        """Test display in descending powers of pi."""
        assert str(PiPoly.from_strings(["-8", "1", "1"])) == "pi^2 + pi - 8"
        assert str(HALF_PI) == "1/2*pi"
        assert str(ZERO) == "0"
        assert str(PiPoly.from_strings(["0", "-3"])) == "-3*pi"

    def test_arithmetic(self):
        """Test ring operations against hand expansion."""
        a = PI + 1
        b = PI - 1
        assert a * b == PiPoly.from_strings(["-1", "0", "1"])
        assert a - b == PiPoly.const(2)
        assert (a**2) == PiPoly.from_strings(["1", "2", "1"])

    def test_strings_round_trip(self):
        """Test the string encoding used by certificates."""
        value = PiPoly.from_strings(["85/48", "-301/384", "1/3"])
        assert PiPoly.from_strings(value.to_strings()) == value

    def test_exact_evaluation_at_rational(self):
        """Test evaluation with pi replaced by a rational."""
        value = PiPoly.from_strings(["-8", "1", "1"])
        assert value(Fraction(3)) == 4

    def test_constant_value(self):
        """Test constant_value rejects non-constants."""
        assert PiPoly.const(Fraction(5, 2)).constant_value == Fraction(5, 2)
        with pytest.raises(ValueError):
            PI.constant_value


class TestSigns:
    """Test cases for exact signs at pi."""

    def test_obvious_signs_need_no_enclosure(self):
        """Test same-sign coefficients are decided without refinement."""
        assert pipoly_sign_with_digits(PI + 3) == (1, 0)
        assert pipoly_sign_with_digits(-PI - 3) == (-1, 0)
        assert pipoly_sign(ZERO) == 0

    @pytest.mark.parametrize(
        "parts,sign",
        [
            (["-8", "1", "1"], 1),
            (["-3", "1"], 1),
            (["22/7", "-1"], 1),
            (["355/113", "-1"], 1),
            (["-12", "5"], 1),
            (["-10", "0", "1"], -1),
        ],
    )
    def test_signs(self, parts, sign):
        """Test known signs at pi, including 355/113 - pi which is about 2.7e-7."""
        assert pipoly_sign(PiPoly.from_strings(parts)) == sign

    def test_compare(self):
        """Test comparisons of Q[pi] values."""
        assert pipoly_compare(HALF_PI, Fraction(11, 10)) == 1
        assert pipoly_compare(Fraction(3, 2), HALF_PI) == -1
        assert pipoly_compare(HALF_PI, HALF_PI) == 0

    def test_precision_cap_exhausted(self):
        """Test a sign finer than the cap raises PrecisionError."""
        close = PiPoly.from_strings(["355/113", "-1"])
        with precision_cap(5):
            with pytest.raises(PrecisionError) as exc_info:
                pipoly_sign(close)
        assert exc_info.value.digits == 5
        assert exc_info.value.error_code == "UNDECIDED_PRECISION"

    def test_tracker_records_digits(self):
        """Test the tracker reports the precision that decided a sign."""
        with precision_tracker() as stats:
            pipoly_sign(PiPoly.from_strings(["355/113", "-1"]))
        assert stats.decisions == 1
        assert stats.max_digits >= 7

    def test_rational_bounds(self):
        """Test rational bounds bracket the value."""
        lo, hi = rational_bounds(PiPoly.from_strings(["-8", "1", "1"]), 10)
        assert Fraction(50111, 10000) < lo < hi < Fraction(50112, 10000)

    def test_signs_match_high_precision(self, rng):
        """Test random signs against 50-digit mpmath evaluation."""
        ctx = numeric_context(50)
        for _ in range(100):
            value = random_pipoly(rng, int(rng.integers(0, 5)))
            numeric = value.evaluate(ctx)
            assert abs(numeric) > ctx.mpf(10) ** -30
            assert pipoly_sign(value) == int(ctx.sign(numeric))

    def test_near_cancellation(self, rng):
        """Test values within 10^-20 of a rational keep their exact sign."""
        ctx = numeric_context(80)
        for _ in range(20):
            value = random_pipoly(rng, int(rng.integers(1, 5)))
            lo, hi = rational_bounds(value, 30)
            below, above = value - lo, value - hi
            assert pipoly_sign(below) == int(ctx.sign(below.evaluate(ctx))) == 1
            assert pipoly_sign(above) == int(ctx.sign(above.evaluate(ctx))) == -1


class TestPiPolyRing:
    """Test cases for ring laws of Q[pi] on random elements."""

    def test_ring_axioms(self, rng):
        """Test commutativity, associativity, distributivity and identities."""
        for _ in range(50):
            a, b, c = (random_pipoly(rng, int(rng.integers(0, 5))) for _ in range(3))
            assert a + b == b + a
            assert (a + b) + c == a + (b + c)
            assert a * b == b * a
            assert (a * b) * c == a * (b * c)
            assert a * (b + c) == a * b + a * c
            assert a - a == ZERO
            assert a * ONE == a
            assert (a * b)(Fraction(22, 7)) == a(Fraction(22, 7)) * b(Fraction(22, 7))

    def test_division_identity(self, rng):
        """Test a = q * b + r with deg r < deg b."""
        for _ in range(50):
            a = random_pipoly(rng, int(rng.integers(0, 7)))
            b = random_pipoly(rng, int(rng.integers(0, 4)))
            q, r = a.divmod(b)
            assert a == q * b + r
            assert r.degree < b.degree

    def test_gcd_of_common_factor(self, rng):
        """Test the monic gcd contains a planted common factor and divides both."""
        for _ in range(30):
            a, b = (random_pipoly(rng, int(rng.integers(1, 4)), bits=8) for _ in range(2))
            common = random_pipoly(rng, int(rng.integers(1, 3)), bits=8)
            g = PiPoly.gcd(a * common, b * common)
            assert g.leading == 1
            assert g.degree >= common.degree
            assert (a * common).divmod(g)[1] == ZERO
            assert (b * common).divmod(g)[1] == ZERO
            assert g.divmod(common.monic())[1] == ZERO

    def test_sympy_element(self):
        """Test the sympy ring element has the same coefficients."""
        value = PiPoly.from_strings(["-8", "1/2", "1"])
        assert PiPoly.from_element(value.element) == value
        assert PiPoly.from_expr(value.as_expr()) == value
