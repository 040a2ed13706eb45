"""Univariate polynomials over Q[pi] and Sturm-sequence positivity decisions."""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

import sympy as sp

from ..utils.error_handling import (
    EndpointRootError,
    IntervalError,
    NotPositiveError,
    StepError,
)
from .coeff import (
    HALF_PI,
    ONE,
    PI_DOMAIN,
    ZERO,
    PiPoly,
    as_pipoly,
    pipoly_sign,
    precision_tracker,
    rational_bounds,
)

logger = logging.getLogger(__name__)

Scalar = Union[PiPoly, Fraction, int]

T_SYMBOL = sp.Symbol("t", real=True)


@dataclass(frozen=True)
class Poly:
    """
    Dense polynomial in one variable with Q[pi] coefficients.

    ``coefficients[i]`` multiplies t**i; the leading coefficient is nonzero
    unless the polynomial is zero (no coefficients).
    """

    coefficients: Tuple[PiPoly, ...] = field(default=())

    def __post_init__(self):
        coeffs = [as_pipoly(c) for c in self.coefficients]
        while coeffs and coeffs[-1].is_zero:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @classmethod
    def const(cls, value: Scalar) -> "Poly":
        return cls((as_pipoly(value),))

    @classmethod
    def monomial(cls, power: int, scale: Scalar = 1) -> "Poly":
        return cls((ZERO,) * power + (as_pipoly(scale),))

    @classmethod
    def from_rationals(cls, values: Sequence[Union[Fraction, int]]) -> "Poly":
        return cls(tuple(PiPoly.const(v) for v in values))

    @classmethod
    def from_rep(cls, rep: sp.Poly) -> "Poly":
        """Build from a sympy ``Poly`` in ``T_SYMBOL`` over ``PI_DOMAIN``."""
        terms = {monom[0]: PiPoly.from_element(c) for monom, c in rep.as_dict(native=True).items()}
        size = max(terms, default=-1) + 1
        return cls(tuple(terms.get(i, ZERO) for i in range(size)))

    @cached_property
    def rep(self) -> sp.Poly:
        """This polynomial as a sympy ``Poly`` with coefficients in Q[pi]."""
        terms = {(i,): c.element for i, c in enumerate(self.coefficients) if not c.is_zero}
        return sp.Poly.from_dict(terms, T_SYMBOL, domain=PI_DOMAIN)

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    @property
    def degree(self) -> int:
        """Degree in t; -1 for zero."""
        return len(self.coefficients) - 1

    @property
    def leading(self) -> PiPoly:
        return self.coefficients[-1] if self.coefficients else ZERO

    def coefficient(self, power: int) -> PiPoly:
        if 0 <= power < len(self.coefficients):
            return self.coefficients[power]
        return ZERO

    # Ring operations

    @staticmethod
    def _coerce(other) -> "Poly":
        if isinstance(other, Poly):
            return other
        if isinstance(other, (PiPoly, int, Fraction)):
            return Poly.const(other)
        raise TypeError(f"cannot combine Poly with {type(other).__name__}")

    def __add__(self, other) -> "Poly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        size = max(len(self.coefficients), len(other.coefficients))
        return Poly(tuple(self.coefficient(i) + other.coefficient(i) for i in range(size)))

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(tuple(-c for c in self.coefficients))

    def __sub__(self, other) -> "Poly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (PiPoly, int, Fraction)):
            return Poly(tuple(c * other for c in self.coefficients))
        if not isinstance(other, Poly):
            return NotImplemented
        if self.is_zero or other.is_zero:
            return Poly()
        return Poly.from_rep(self.rep * other.rep)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Poly":
        if exponent < 0:
            raise ValueError("negative powers are not polynomials")
        return Poly.from_rep(self.rep**exponent)

    def shift(self, power: int) -> "Poly":
        """Multiply by t**power."""
        if self.is_zero:
            return self
        return Poly((ZERO,) * power + self.coefficients)

    # Evaluation

    def compose(self, at: Scalar) -> PiPoly:
        """Exact value at a point of Q[pi], as an element of Q[pi]."""
        at = as_pipoly(at)
        result = ZERO
        for c in reversed(self.coefficients):
            result = result * at + c
        return result

    def evaluate(self, ctx, value):
        """Numeric value in an mpmath-like context."""
        result = ctx.mpf(0)
        for c in reversed(self.coefficients):
            result = result * value + c.evaluate(ctx)
        return result

    def rational_parts(self) -> List[Fraction]:
        return [r for c in self.coefficients for r in c.coefficients]

    def to_strings(self) -> List[List[str]]:
        return [c.to_strings() for c in self.coefficients]

    def render(self, variable: str = "t") -> str:
        if self.is_zero:
            return "0"
        parts = []
        for power in range(len(self.coefficients) - 1, -1, -1):
            c = self.coefficients[power]
            if c.is_zero:
                continue
            single = sum(1 for r in c.coefficients if r != 0) == 1
            negative = single and c.leading < 0
            magnitude = -c if negative else c
            if power == 0:
                body = str(magnitude) if single else f"({magnitude})"
            else:
                symbol = variable if power == 1 else f"{variable}^{power}"
                if magnitude == ONE:
                    body = symbol
                elif single:
                    body = f"{magnitude}*{symbol}"
                else:
                    body = f"({magnitude})*{symbol}"
            if not parts:
                parts.append(f"-{body}" if negative else body)
            else:
                parts.append(f"- {body}" if negative else f"+ {body}")
        return " ".join(parts)

    def __str__(self) -> str:
        return self.render("t")

    def __repr__(self) -> str:
        return f"Poly({self})"


# ---------------------------------------------------------------------------
# Intervals with Q[pi] endpoints
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalQPi:
    """Interval with Q[pi] endpoints; lo < hi is checked at construction."""

    lo: PiPoly
    hi: PiPoly
    lo_open: bool = True
    hi_open: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lo", as_pipoly(self.lo))
        object.__setattr__(self, "hi", as_pipoly(self.hi))
        if pipoly_sign(self.hi - self.lo) != 1:
            raise IntervalError(
                f"empty interval: {self.hi} is not above {self.lo}",
                details={"lo": str(self.lo), "hi": str(self.hi)},
            )

    def contains(self, point: Scalar, strictly: bool = False) -> bool:
        """Membership of a Q[pi] point; ``strictly`` ignores closed endpoints."""
        point = as_pipoly(point)
        above = pipoly_sign(point - self.lo)
        below = pipoly_sign(self.hi - point)
        if above < 0 or below < 0:
            return False
        if above == 0:
            return not (strictly or self.lo_open)
        if below == 0:
            return not (strictly or self.hi_open)
        return True

    def split(self, point: Scalar) -> Tuple["IntervalQPi", "IntervalQPi"]:
        """Split into (lo, point] and (point, hi) keeping the outer brackets."""
        point = as_pipoly(point)
        if not self.contains(point, strictly=True):
            raise IntervalError(
                f"split point {point} is not inside {self}",
                details={"point": str(point), "interval": str(self)},
            )
        left = IntervalQPi(self.lo, point, self.lo_open, False)
        right = IntervalQPi(point, self.hi, True, self.hi_open)
        return left, right

    def reflected(self) -> "IntervalQPi":
        """Image under t -> pi/2 - t."""
        return IntervalQPi(HALF_PI - self.hi, HALF_PI - self.lo, self.hi_open, self.lo_open)

    def squared(self) -> "IntervalQPi":
        """Image under t -> t^2 of a non-negative interval."""
        if pipoly_sign(self.lo) < 0:
            raise IntervalError(f"cannot square {self}: it extends below 0")
        return IntervalQPi(self.lo * self.lo, self.hi * self.hi, self.lo_open, self.hi_open)

    def within(self, lo: Scalar, hi: Scalar) -> bool:
        """Whether this interval lies inside the closed interval [lo, hi]."""
        return pipoly_sign(self.lo - as_pipoly(lo)) >= 0 and pipoly_sign(as_pipoly(hi) - self.hi) >= 0

    def __str__(self) -> str:
        left = "(" if self.lo_open else "["
        right = ")" if self.hi_open else "]"
        return f"{left}{self.lo}, {self.hi}{right}"


def rational_between(interval: IntervalQPi) -> Fraction:
    """
    A rational with a small denominator strictly inside the interval.

    Args:
        interval: Interval with Q[pi] endpoints

    Returns:
        Rational point in the open interior
    """
    digits = 20
    while True:
        _, lo_up = rational_bounds(interval.lo, digits)
        hi_down, _ = rational_bounds(interval.hi, digits)
        if lo_up < hi_down:
            break
        digits *= 2

    middle = (lo_up + hi_down) / 2
    max_denominator = 1
    while True:
        candidate = middle.limit_denominator(max_denominator)
        if lo_up < candidate < hi_down:
            return candidate
        max_denominator *= 2


def _rational_grid(interval: IntervalQPi, count: int) -> List[Fraction]:
    digits = 20
    while True:
        _, lo_up = rational_bounds(interval.lo, digits)
        hi_down, _ = rational_bounds(interval.hi, digits)
        if lo_up < hi_down:
            break
        digits *= 2
    step = (hi_down - lo_up) / count
    return [lo_up + i * step for i in range(1, count)]


# ---------------------------------------------------------------------------
# Structural operations
# ---------------------------------------------------------------------------

def derivative(p: Poly) -> Poly:
    """Formal derivative d/dt."""
    return Poly.from_rep(p.rep.diff(T_SYMBOL))


def eval_sign(p: Poly, at: Scalar) -> int:
    """Exact sign of p at a point of Q[pi]."""
    return pipoly_sign(p.compose(at))


def factor_monomial(p: Poly) -> Tuple[int, Poly]:
    """
    Split off the largest power of t: p = t^m * q with q(0) != 0.

    Returns:
        (m, q)
    """
    if p.is_zero:
        raise StepError("cannot factor the zero polynomial")
    m = next(i for i, c in enumerate(p.coefficients) if not c.is_zero)
    return m, Poly(p.coefficients[m:])


def normalize_integer(p: Poly) -> Tuple[Fraction, Poly]:
    """
    Write p = scale * q with integer rational parts of content 1.

    Returns:
        (positive scale, q)
    """
    if p.is_zero:
        raise StepError("cannot normalize the zero polynomial")
    parts = [r for r in p.rational_parts() if r != 0]
    numerator = math.gcd(*(r.numerator for r in parts))
    denominator = math.lcm(*(r.denominator for r in parts))
    scale = Fraction(numerator, denominator)
    return scale, p * (1 / scale)


def substitute_square(p: Poly) -> Poly:
    """q with q(z) = p(sqrt z); p must have only even powers of t."""
    odd = [i for i, c in enumerate(p.coefficients) if i % 2 == 1 and not c.is_zero]
    if odd:
        raise StepError(
            f"odd power t^{odd[0]} present, cannot substitute z = t^2",
            details={"odd_powers": odd},
        )
    return Poly(p.coefficients[::2])


# ---------------------------------------------------------------------------
# Pseudo-division, gcd, Sturm chains
# ---------------------------------------------------------------------------

def pseudo_divmod(a: Poly, b: Poly) -> Tuple[Poly, Poly, int]:
    """
    Pseudo-division lc(b)^delta * a = q * b + r with deg r < deg b.

    Returns:
        (q, r, delta) with delta = max(deg a - deg b + 1, 0)
    """
    if b.is_zero:
        raise ZeroDivisionError("pseudo-division by the zero polynomial")
    if a.degree < b.degree:
        return Poly(), a, 0
    quotient, remainder = a.rep.pdiv(b.rep)
    return Poly.from_rep(quotient), Poly.from_rep(remainder), a.degree - b.degree + 1


def primitive_part(p: Poly) -> Poly:
    """
    Positive rescaling of p with Q[pi]-content 1 and integer content 1.

    The Q[pi] content is divided out with its sign at pi corrected, so the
    result has the same sign as p everywhere.
    """
    if p.is_zero:
        return p
    content, primitive = p.rep.primitive()
    content = PiPoly.from_expr(content)
    if content.degree > 0:
        p = Poly.from_rep(primitive) * pipoly_sign(content)
    return normalize_integer(p)[1]


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Greatest common divisor up to a nonzero Q[pi] scalar."""
    return primitive_part(Poly.from_rep(a.rep.gcd(b.rep)))


def squarefree_part(p: Poly) -> Poly:
    """Product of the distinct irreducible factors of p, up to a nonzero Q[pi] scalar."""
    if p.degree <= 0:
        return primitive_part(p)
    return primitive_part(Poly.from_rep(p.rep.sqf_part()))


@dataclass(frozen=True)
class SturmChain:
    """Sturm sequence of the squarefree part of ``source``."""

    source: Poly
    elements: Tuple[Poly, ...]

    def sign_changes(self, at: Scalar) -> int:
        return sign_variations([eval_sign(e, at) for e in self.elements])

    def sign_changes_at_infinity(self, positive: bool) -> int:
        signs = []
        for e in self.elements:
            s = pipoly_sign(e.leading)
            if not positive and e.degree % 2 == 1:
                s = -s
            signs.append(s)
        return sign_variations(signs)

    def __len__(self) -> int:
        return len(self.elements)


def sign_variations(signs: Sequence[int]) -> int:
    """Number of sign changes in a sequence, zeros skipped."""
    nonzero = [s for s in signs if s != 0]
    return sum(1 for a, b in zip(nonzero, nonzero[1:]) if a != b)


def sturm_chain(p: Poly) -> SturmChain:
    """
    Sturm sequence built from signed pseudo-remainders.

    Each element after the first two is -sign(lc)^delta * prem(prev, cur),
    made primitive by positive scalings, so sign variations match the
    field-arithmetic chain exactly. The first element is the squarefree part
    up to a nonzero scalar, which scales the whole chain alike.
    """
    if p.is_zero:
        raise StepError("Sturm chain of the zero polynomial")

    first = squarefree_part(p)
    elements = [first]
    if first.degree >= 1:
        elements.append(primitive_part(derivative(first)))
    while len(elements) >= 2 and elements[-1].degree > 0:
        previous, current = elements[-2], elements[-1]
        remainder = Poly.from_rep(previous.rep.prem(current.rep))
        if remainder.is_zero:
            break
        delta = previous.degree - current.degree + 1
        if delta % 2 == 1 and pipoly_sign(current.leading) < 0:
            remainder = -remainder
        elements.append(primitive_part(-remainder))

    logger.debug(f"Sturm chain of degree {first.degree} has {len(elements)} elements")
    return SturmChain(source=p, elements=tuple(elements))


def count_roots(chain: SturmChain, interval: Optional[IntervalQPi] = None) -> int:
    """
    Distinct real roots of the chain source, in an interval or on the line.

    Raises:
        EndpointRootError: an interval endpoint is a root of the source
    """
    if interval is None:
        return chain.sign_changes_at_infinity(False) - chain.sign_changes_at_infinity(True)

    squarefree = chain.elements[0]
    for endpoint in (interval.lo, interval.hi):
        if eval_sign(squarefree, endpoint) == 0:
            raise EndpointRootError(str(endpoint), details={"interval": str(interval)})
    return chain.sign_changes(interval.lo) - chain.sign_changes(interval.hi)


# ---------------------------------------------------------------------------
# Positivity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PositivityCertificate:
    """Kernel verdict: p has no roots in the interval and is positive at a sample."""

    poly: Poly
    interval: IntervalQPi
    root_count: int
    sample: Fraction
    sample_sign: int
    endpoint_signs: Dict[str, int]
    chain_length: int
    digits: int


def find_witness(p: Poly, interval: IntervalQPi, grid: int = 64) -> Optional[Tuple[Fraction, int]]:
    """Grid search for a rational point of the interval where p <= 0."""
    for point in _rational_grid(interval, grid):
        sign = eval_sign(p, point)
        if sign <= 0:
            return point, sign
    return None


def prove_positive(p: Poly, interval: IntervalQPi) -> PositivityCertificate:
    """
    Certify p > 0 on the interval (closed endpoints included).

    Raises:
        NotPositiveError: p vanishes or is negative somewhere, with a witness
        EndpointRootError: an open endpoint is a root of p
    """
    with precision_tracker() as stats:
        if p.is_zero:
            raise NotPositiveError("polynomial is identically zero", witness=None, witness_sign=0)

        sample = rational_between(interval)
        sample_sign = eval_sign(p, sample)
        if sample_sign <= 0:
            raise NotPositiveError(
                f"not positive at t = {sample}", witness=sample, witness_sign=sample_sign
            )

        endpoint_signs = {}
        for endpoint, is_open in ((interval.lo, interval.lo_open), (interval.hi, interval.hi_open)):
            if is_open:
                continue
            sign = eval_sign(p, endpoint)
            endpoint_signs[str(endpoint)] = sign
            if sign <= 0:
                raise NotPositiveError(
                    f"not positive at closed endpoint {endpoint}", witness=endpoint, witness_sign=sign
                )

        chain = sturm_chain(p)
        roots = count_roots(chain, interval)
        if roots:
            witness = find_witness(p, interval)
            raise NotPositiveError(
                f"{roots} real root(s) in {interval}",
                witness=None if witness is None else witness[0],
                witness_sign=None if witness is None else witness[1],
                details={"root_count": roots},
            )

    logger.debug(f"Certified {p} > 0 on {interval} with a chain of {len(chain)} elements")
    return PositivityCertificate(
        poly=p,
        interval=interval,
        root_count=0,
        sample=sample,
        sample_sign=sample_sign,
        endpoint_signs=endpoint_signs,
        chain_length=len(chain),
        digits=stats.max_digits,
    )


def check_positivity_certificate(certificate: PositivityCertificate) -> bool:
    """Re-run the sign evaluations and the sign-change count of a verdict."""
    p, interval = certificate.poly, certificate.interval
    if p.is_zero or certificate.root_count != 0:
        return False
    if not interval.contains(certificate.sample, strictly=True):
        return False
    if eval_sign(p, certificate.sample) != 1:
        return False
    for endpoint, is_open in ((interval.lo, interval.lo_open), (interval.hi, interval.hi_open)):
        if not is_open and eval_sign(p, endpoint) != 1:
            return False
    try:
        return count_roots(sturm_chain(p), interval) == 0
    except EndpointRootError:
        return False
