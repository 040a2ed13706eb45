"""Exact arithmetic over Q and Q[pi], with certified signs at pi.

Rationals are ``fractions.Fraction`` (always reduced, positive denominator).
``PiPoly`` is an element of Q[pi]: a rational-coefficient polynomial in the
symbol pi. Its sign at the real number pi is decided by evaluating it over
rational enclosures of pi that are refined until the result excludes zero;
since pi is transcendental this terminates for every nonzero element.
"""

import logging
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import sympy as sp

from ..config import settings
from ..utils.error_handling import PrecisionError

logger = logging.getLogger(__name__)

Rational = Fraction
Number = Union[int, Fraction]

PI_SYMBOL = sp.Symbol("pi", positive=True)
PI_DOMAIN = sp.QQ[PI_SYMBOL]
PI_RING = PI_DOMAIN.ring

_PRECISION_CAP: ContextVar[Optional[int]] = ContextVar("mtp_prover_precision_cap", default=None)
_PRECISION_STATS: ContextVar[Optional["PrecisionStats"]] = ContextVar(
    "mtp_prover_precision_stats", default=None
)


def format_rational(value: Fraction) -> str:
    """Render a rational as ``n/d`` (or ``n`` when integral)."""
    return str(Fraction(value))


def parse_rational(text: str) -> Fraction:
    """Parse ``n/d`` or ``n`` into a reduced rational."""
    return Fraction(text.strip())


def from_domain(value) -> Fraction:
    """Convert an element of sympy's QQ domain to a Fraction."""
    return Fraction(int(value.numerator), int(value.denominator))


def to_domain(value: Fraction):
    return sp.QQ(value.numerator, value.denominator)


# ---------------------------------------------------------------------------
# Rational enclosures of pi
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PiEnclosure:
    """Rational interval with lo < pi < hi and hi - lo <= 10^-digits."""

    lo: Fraction
    hi: Fraction
    digits: int

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, other: "PiEnclosure") -> bool:
        """Whether ``other`` lies inside this enclosure."""
        return self.lo <= other.lo and other.hi <= self.hi


def _arctan_inverse_scaled(x: int, scale: int) -> Tuple[int, int]:
    """
    Fixed-point arctan(1/x) by its alternating series.

    Every term is floor(scale / (x^(2k+1) (2k+1))), off by less than one unit;
    summation stops at the first zero term, whose true value (< 1) bounds the
    alternating remainder.

    Returns:
        (approximation, error bound) in units of 1/scale, error strict
    """
    x_squared = x * x
    power = scale // x
    total = 0
    terms = 0
    k = 0
    while True:
        term = power // (2 * k + 1)
        if term == 0:
            break
        total += term if k % 2 == 0 else -term
        terms += 1
        k += 1
        power //= x_squared
    return total, terms + 1


def _machin_scaled(scale: int) -> Tuple[int, int]:
    """pi * scale via pi = 16 arctan(1/5) - 4 arctan(1/239), with error bound."""
    a5, e5 = _arctan_inverse_scaled(5, scale)
    a239, e239 = _arctan_inverse_scaled(239, scale)
    return 16 * a5 - 4 * a239, 16 * e5 + 4 * e239


@lru_cache(maxsize=64)
def pi_enclosure(digits: int) -> PiEnclosure:
    """
    Decimal enclosure [n/10^d, (n+1)/10^d] of pi with n = floor(pi * 10^d).

    The fixed-point Machin sum is widened by its error bound and the guard
    digits grow until floor(pi * 10^d) is determined. Enclosures for
    increasing ``digits`` are nested because they are decimal truncations.

    Args:
        digits: Decimal digits of guaranteed accuracy (>= 1)

    Returns:
        Enclosure of width exactly 10^-digits
    """
    if digits < 1:
        raise ValueError("digits must be at least 1")

    guard = 10
    while True:
        scale = 10 ** (digits + guard)
        approx, error = _machin_scaled(scale)
        unit = 10 ** guard
        low = (approx - error) // unit
        high = (approx + error) // unit
        if low == high:
            denominator = 10 ** digits
            return PiEnclosure(Fraction(low, denominator), Fraction(low + 1, denominator), digits)
        guard += 10


# ---------------------------------------------------------------------------
# Precision cap and statistics (context-local)
# ---------------------------------------------------------------------------

@dataclass
class PrecisionStats:
    """Counters collected while a tracker is active."""

    decisions: int = 0
    max_digits: int = 0
    parent: Optional["PrecisionStats"] = None

    def record(self, digits: int):
        self.decisions += 1
        self.max_digits = max(self.max_digits, digits)
        if self.parent is not None:
            self.parent.record(digits)


@contextmanager
def precision_cap(digits: int) -> Iterator[int]:
    """Temporarily override the refinement cap for sign decisions."""
    if digits < 1:
        raise ValueError("precision cap must be at least 1 digit")
    token = _PRECISION_CAP.set(digits)
    try:
        yield digits
    finally:
        _PRECISION_CAP.reset(token)


@contextmanager
def precision_tracker() -> Iterator[PrecisionStats]:
    """Collect the precision used by sign decisions in this context."""
    stats = PrecisionStats(parent=_PRECISION_STATS.get())
    token = _PRECISION_STATS.set(stats)
    try:
        yield stats
    finally:
        _PRECISION_STATS.reset(token)


def current_precision_cap() -> int:
    cap = _PRECISION_CAP.get()
    return cap if cap is not None else settings.max_digits


# ---------------------------------------------------------------------------
# Q[pi]
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PiPoly:
    """
    Element of Q[pi]; ``coefficients[i]`` multiplies pi**i.

    Trailing zeros are stripped, so zero has no coefficients.
    """

    coefficients: Tuple[Fraction, ...] = field(default=())

    def __post_init__(self):
        coeffs = [Fraction(c) for c in self.coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    # Constructors

    @classmethod
    def const(cls, value: Number) -> "PiPoly":
        return cls((Fraction(value),))

    @classmethod
    def pi_power(cls, exponent: int = 1, scale: Number = 1) -> "PiPoly":
        return cls((Fraction(0),) * exponent + (Fraction(scale),))

    @classmethod
    def from_strings(cls, values: Sequence[str]) -> "PiPoly":
        return cls(tuple(parse_rational(v) for v in values))

    @classmethod
    def from_element(cls, element) -> "PiPoly":
        """Build from an element of ``PI_RING`` (or ``PI_DOMAIN``)."""
        terms = {monom[0]: from_domain(c) for monom, c in element.terms()}
        size = max(terms, default=-1) + 1
        return cls(tuple(terms.get(i, Fraction(0)) for i in range(size)))

    @classmethod
    def from_expr(cls, expr: sp.Expr) -> "PiPoly":
        """Build from a sympy expression polynomial in ``PI_SYMBOL``."""
        return cls.from_element(PI_DOMAIN.from_sympy(sp.sympify(expr)))

    @cached_property
    def element(self):
        """This element as a sympy ring element of ``PI_RING``."""
        return PI_RING.from_dict(
            {(i,): to_domain(c) for i, c in enumerate(self.coefficients) if c != 0}
        )

    def as_expr(self) -> sp.Expr:
        return self.element.as_expr()

    # Structure

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    @property
    def degree(self) -> int:
        """Degree in pi; -1 for zero."""
        return len(self.coefficients) - 1

    @property
    def is_constant(self) -> bool:
        return len(self.coefficients) <= 1

    @property
    def constant_value(self) -> Fraction:
        """The rational value of a constant element."""
        if not self.is_constant:
            raise ValueError(f"{self} is not a rational constant")
        return self.coefficients[0] if self.coefficients else Fraction(0)

    @property
    def leading(self) -> Fraction:
        return self.coefficients[-1] if self.coefficients else Fraction(0)

    def coefficient(self, power: int) -> Fraction:
        if 0 <= power < len(self.coefficients):
            return self.coefficients[power]
        return Fraction(0)

    def to_strings(self) -> List[str]:
        return [format_rational(c) for c in self.coefficients]

    # Ring operations

    @staticmethod
    def _coerce(other) -> "PiPoly":
        if isinstance(other, PiPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return PiPoly.const(other)
        raise TypeError(f"cannot combine PiPoly with {type(other).__name__}")

    def __add__(self, other) -> "PiPoly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        size = max(len(self.coefficients), len(other.coefficients))
        return PiPoly(tuple(self.coefficient(i) + other.coefficient(i) for i in range(size)))

    __radd__ = __add__

    def __neg__(self) -> "PiPoly":
        return PiPoly(tuple(-c for c in self.coefficients))

    def __sub__(self, other) -> "PiPoly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "PiPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "PiPoly":
        if isinstance(other, (int, Fraction)):
            return PiPoly(tuple(c * other for c in self.coefficients))
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        if self.is_zero or other.is_zero:
            return PiPoly()
        if other.is_constant:
            return self * other.constant_value
        if self.is_constant:
            return other * self.constant_value
        return PiPoly.from_element(self.element * other.element)

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "PiPoly":
        """Division by a nonzero rational."""
        if not isinstance(other, (int, Fraction)):
            return NotImplemented
        return self * (1 / Fraction(other))

    def __pow__(self, exponent: int) -> "PiPoly":
        if exponent < 0:
            raise ValueError("negative powers are not in Q[pi]")
        return PiPoly.from_element(self.element**exponent)

    def divmod(self, other: "PiPoly") -> Tuple["PiPoly", "PiPoly"]:
        """Long division in Q[pi] viewed as Q[x]."""
        if other.is_zero:
            raise ZeroDivisionError("division by zero in Q[pi]")
        quotient, remainder = self.element.div(other.element)
        return PiPoly.from_element(quotient), PiPoly.from_element(remainder)

    def exact_div(self, other: "PiPoly") -> "PiPoly":
        quotient, remainder = self.divmod(other)
        if not remainder.is_zero:
            raise ArithmeticError(f"{other} does not divide {self}")
        return quotient

    def monic(self) -> "PiPoly":
        return self / self.leading if not self.is_zero else self

    @staticmethod
    def gcd(a: "PiPoly", b: "PiPoly") -> "PiPoly":
        """Monic gcd in Q[pi] (zero only when both are zero)."""
        if a.is_zero and b.is_zero:
            return ZERO
        return PiPoly.from_element(a.element.gcd(b.element)).monic()

    # Evaluation

    def __call__(self, value: Number) -> Fraction:
        """Exact value at a rational standing in for pi."""
        result = Fraction(0)
        for c in reversed(self.coefficients):
            result = result * value + c
        return result

    def enclose(self, lo: Fraction, hi: Fraction) -> Tuple[Fraction, Fraction]:
        """Rational bounds of this element for pi in [lo, hi] with lo > 0."""
        low = Fraction(0)
        high = Fraction(0)
        lo_power = Fraction(1)
        hi_power = Fraction(1)
        for c in self.coefficients:
            if c > 0:
                low += c * lo_power
                high += c * hi_power
            elif c < 0:
                low += c * hi_power
                high += c * lo_power
            lo_power *= lo
            hi_power *= hi
        return low, high

    def evaluate(self, ctx):
        """Numeric value in an mpmath-like context."""
        result = ctx.mpf(0)
        for c in reversed(self.coefficients):
            result = result * ctx.pi + ctx.mpf(c.numerator) / c.denominator
        return result

    # Display

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for power in range(len(self.coefficients) - 1, -1, -1):
            c = self.coefficients[power]
            if c == 0:
                continue
            magnitude = abs(c)
            if power == 0:
                body = format_rational(magnitude)
            else:
                symbol = "pi" if power == 1 else f"pi^{power}"
                body = symbol if magnitude == 1 else f"{format_rational(magnitude)}*{symbol}"
            if not parts:
                parts.append(f"-{body}" if c < 0 else body)
            else:
                parts.append(f"- {body}" if c < 0 else f"+ {body}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"PiPoly({self})"


ZERO = PiPoly()
ONE = PiPoly.const(1)
PI = PiPoly.pi_power(1)
HALF_PI = PiPoly.pi_power(1, Fraction(1, 2))


def as_pipoly(value: Union[PiPoly, Number]) -> PiPoly:
    return value if isinstance(value, PiPoly) else PiPoly.const(value)


# ---------------------------------------------------------------------------
# Signs at pi
# ---------------------------------------------------------------------------

def pipoly_sign_with_digits(p: PiPoly) -> Tuple[int, int]:
    """
    Sign of p(pi) and the enclosure precision that decided it.

    Raises:
        PrecisionError: the sign is still undecided at the precision cap
    """
    if p.is_zero:
        return 0, 0

    nonzero = [c for c in p.coefficients if c != 0]
    if all(c > 0 for c in nonzero):
        return 1, 0
    if all(c < 0 for c in nonzero):
        return -1, 0

    stats = _PRECISION_STATS.get()
    cap = current_precision_cap()
    for digits in settings.refinement_schedule(cap):
        enclosure = pi_enclosure(digits)
        low, high = p.enclose(enclosure.lo, enclosure.hi)
        if low > 0 or high < 0:
            if stats is not None:
                stats.record(digits)
            return (1 if low > 0 else -1), digits
        logger.debug(f"Sign of {p} undecided at {digits} digits, refining")

    raise PrecisionError(cap, details={"value": str(p)})


def pipoly_sign(p: PiPoly) -> int:
    """Exact sign in {-1, 0, +1} of p evaluated at pi."""
    return pipoly_sign_with_digits(p)[0]


def pipoly_compare(a: Union[PiPoly, Number], b: Union[PiPoly, Number]) -> int:
    """Sign of a - b at pi."""
    return pipoly_sign(as_pipoly(a) - as_pipoly(b))


def rational_bounds(p: PiPoly, digits: int) -> Tuple[Fraction, Fraction]:
    """Rational lower/upper bounds of p(pi) from the enclosure at ``digits``."""
    if p.is_constant:
        value = p.constant_value
        return value, value
    enclosure = pi_enclosure(digits)
    return p.enclose(enclosure.lo, enclosure.hi)
