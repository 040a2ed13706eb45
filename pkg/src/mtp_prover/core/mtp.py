"""
Mixed trigonometric polynomial expressions.

An ``MTPExpr`` is a finite sum of terms ``c * v^p * prod(atom^e) * pi^-k`` where
``c`` lies in Q[pi], ``v`` is the expression variable (``t`` or ``x``) and the
atoms are sin/cos of integer multiples of ``v``, arctan of ``v``, sin ``v`` or
cos ``v``, and arcsin of ``v``. Negative exponents (on ``v``, the atoms and pi)
keep quotients such as ``atan(x)/x`` representable until they are cleared.

This module also holds the multiple-angle rewrite into ``FourierForm``, the
reflection t -> pi/2 - t, the x = sin t substitution and positive-multiplier
bookkeeping.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple, Union

import sympy as sp
from sympy.simplify.fu import TR8

from ..utils.error_handling import InputError, StepError
from .coeff import HALF_PI, ONE, PI, ZERO, PiPoly, as_pipoly, pipoly_sign
from .poly import IntervalQPi, Poly

logger = logging.getLogger(__name__)

VAR = "var"
FUNCTIONS = ("sin", "cos", "atan", "asin")
_FUNCTION_ORDER = {name: i for i, name in enumerate(FUNCTIONS)}
_INNER_ORDER = {VAR: 0, "sin": 1, "cos": 2}

Scalar = Union[PiPoly, Fraction, int]


@dataclass(frozen=True)
class Atom:
    """A transcendental factor: sin(m v), cos(m v), atan(v | sin v | cos v) or asin(v)."""

    func: str
    mult: int = 1
    inner: str = VAR

    def __post_init__(self):
        if self.func not in FUNCTIONS:
            raise InputError(f"unsupported function {self.func!r}")
        if self.mult < 1:
            raise InputError(f"angle multiplier must be a positive integer, got {self.mult}")
        if self.func in ("sin", "cos") and self.inner != VAR:
            raise InputError(f"{self.func} applies to the variable only")
        if self.func == "atan" and (self.inner not in _INNER_ORDER or self.mult != 1):
            raise InputError("atan applies to the variable, sin or cos of the variable")
        if self.func == "asin" and (self.inner != VAR or self.mult != 1):
            raise InputError("asin applies to the variable only")

    @property
    def sort_key(self) -> Tuple[int, int, int]:
        return (_FUNCTION_ORDER[self.func], _INNER_ORDER[self.inner], self.mult)

    @property
    def is_inverse(self) -> bool:
        return self.func in ("atan", "asin")

    def render(self, variable: str) -> str:
        if self.func in ("sin", "cos"):
            argument = variable if self.mult == 1 else f"{self.mult}*{variable}"
            return f"{self.func}({argument})"
        if self.inner == VAR:
            return f"{self.func}({variable})"
        return f"{self.func}({self.inner}({variable}))"

    def selector(self, variable: str) -> str:
        """Script selector addressing this atom, e.g. ``cos@8t`` or ``atan@sin``."""
        if self.func in ("sin", "cos"):
            prefix = "" if self.mult == 1 else str(self.mult)
            return f"{self.func}@{prefix}{variable}"
        return f"{self.func}@{variable if self.inner == VAR else self.inner}"

    def evaluate(self, ctx, value):
        if self.func == "sin":
            return ctx.sin(self.mult * value)
        if self.func == "cos":
            return ctx.cos(self.mult * value)
        if self.func == "asin":
            return ctx.asin(value)
        inner = value if self.inner == VAR else getattr(ctx, self.inner)(value)
        return ctx.atan(inner)


SIN = Atom("sin")
COS = Atom("cos")
ATAN_SIN = Atom("atan", inner="sin")
ATAN_COS = Atom("atan", inner="cos")
ATAN_VAR = Atom("atan")
ASIN_VAR = Atom("asin")


@dataclass(frozen=True)
class Monomial:
    """``v^var_power * prod(atom^exp) * pi^pi_power`` with pi_power <= 0."""

    var_power: int = 0
    atoms: Tuple[Tuple[Atom, int], ...] = ()
    pi_power: int = 0

    def __post_init__(self):
        merged: Dict[Atom, int] = {}
        for atom, exponent in self.atoms:
            merged[atom] = merged.get(atom, 0) + exponent
        atoms = tuple(
            sorted(((a, e) for a, e in merged.items() if e != 0), key=lambda item: item[0].sort_key)
        )
        object.__setattr__(self, "atoms", atoms)

    @property
    def sort_key(self):
        return (
            self.var_power,
            tuple((a.sort_key, e) for a, e in self.atoms),
            self.pi_power,
        )

    @property
    def is_one(self) -> bool:
        return self.var_power == 0 and not self.atoms and self.pi_power == 0

    @property
    def has_denominator(self) -> bool:
        return self.var_power < 0 or self.pi_power < 0 or any(e < 0 for _, e in self.atoms)

    def exponent(self, atom: Atom) -> int:
        for a, e in self.atoms:
            if a == atom:
                return e
        return 0

    def without(self, atom: Atom) -> "Monomial":
        return Monomial(self.var_power, tuple((a, e) for a, e in self.atoms if a != atom), self.pi_power)

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial(
            self.var_power + other.var_power,
            self.atoms + other.atoms,
            self.pi_power + other.pi_power,
        )

    def inverse(self) -> "Monomial":
        return Monomial(-self.var_power, tuple((a, -e) for a, e in self.atoms), -self.pi_power)

    def factors(self, variable: str) -> List[str]:
        parts = []
        if self.var_power:
            parts.append(variable if self.var_power == 1 else f"{variable}^{self.var_power}")
        for atom, exponent in self.atoms:
            text = atom.render(variable)
            parts.append(text if exponent == 1 else f"{text}^{exponent}")
        if self.pi_power:
            parts.append(f"pi^{self.pi_power}")
        return parts


def _accumulate(acc: Dict[Monomial, PiPoly], monomial: Monomial, coefficient: PiPoly):
    """Add a term, folding positive pi powers of a pi^-k term into Q[pi]."""
    if coefficient.is_zero:
        return
    if monomial.pi_power > 0:
        coefficient = coefficient * PiPoly.pi_power(monomial.pi_power)
        monomial = Monomial(monomial.var_power, monomial.atoms, 0)
    if monomial.pi_power == 0:
        pieces = [(monomial, coefficient)]
    else:
        pieces = []
        for power, c in enumerate(coefficient.coefficients):
            if c == 0:
                continue
            shifted = power + monomial.pi_power
            if shifted >= 0:
                pieces.append((Monomial(monomial.var_power, monomial.atoms, 0), PiPoly.pi_power(shifted, c)))
            else:
                pieces.append((Monomial(monomial.var_power, monomial.atoms, shifted), PiPoly.const(c)))
    for key, value in pieces:
        total = acc.get(key, ZERO) + value
        if total.is_zero:
            acc.pop(key, None)
        else:
            acc[key] = total


@dataclass(frozen=True)
class MTPExpr:
    """Canonical sum of terms; see the module docstring."""

    terms: Tuple[Tuple[Monomial, PiPoly], ...] = ()
    variable: str = "t"

    def __post_init__(self):
        acc: Dict[Monomial, PiPoly] = {}
        for monomial, coefficient in self.terms:
            _accumulate(acc, monomial, as_pipoly(coefficient))
        ordered = tuple(sorted(acc.items(), key=lambda item: item[0].sort_key))
        object.__setattr__(self, "terms", ordered)

    # Constructors

    @classmethod
    def const(cls, value: Scalar, variable: str = "t") -> "MTPExpr":
        return cls(((Monomial(), as_pipoly(value)),), variable)

    @classmethod
    def var(cls, variable: str = "t", power: int = 1) -> "MTPExpr":
        return cls(((Monomial(var_power=power), ONE),), variable)

    @classmethod
    def atom(cls, atom: Atom, variable: str = "t", exponent: int = 1) -> "MTPExpr":
        return cls(((Monomial(atoms=((atom, exponent),)), ONE),), variable)

    @classmethod
    def from_poly(cls, poly: Poly, variable: str = "t", base: Optional[Atom] = None, scale: int = 1) -> "MTPExpr":
        """Polynomial in ``v`` (or in ``base(v)``); ``scale`` substitutes scale*v."""
        terms = []
        for power, c in enumerate(poly.coefficients):
            if base is None:
                monomial = Monomial(var_power=power)
            else:
                monomial = Monomial(atoms=((base, power),))
            terms.append((monomial, c * Fraction(scale) ** power))
        return cls(tuple(terms), variable)

    # Structure

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_single_term(self) -> bool:
        return len(self.terms) == 1

    @property
    def depends_on_variable(self) -> bool:
        return any(m.var_power or m.atoms for m, _ in self.terms)

    @property
    def has_denominator(self) -> bool:
        return any(m.has_denominator for m, _ in self.terms)

    def atoms(self) -> List[Atom]:
        seen = {a for m, _ in self.terms for a, _ in m.atoms}
        return sorted(seen, key=lambda a: a.sort_key)

    def has_atom(self, atom: Atom) -> bool:
        return any(m.exponent(atom) for m, _ in self.terms)

    def with_variable(self, variable: str) -> "MTPExpr":
        return MTPExpr(self.terms, variable)

    # Arithmetic

    def _align(self, other: "MTPExpr") -> str:
        if self.variable == other.variable:
            return self.variable
        if not other.depends_on_variable:
            return self.variable
        if not self.depends_on_variable:
            return other.variable
        raise InputError(f"cannot mix variables {self.variable} and {other.variable}")

    @staticmethod
    def _coerce(other, variable: str) -> "MTPExpr":
        if isinstance(other, MTPExpr):
            return other
        if isinstance(other, (PiPoly, int, Fraction)):
            return MTPExpr.const(other, variable)
        raise TypeError(f"cannot combine MTPExpr with {type(other).__name__}")

    def __add__(self, other) -> "MTPExpr":
        try:
            other = self._coerce(other, self.variable)
        except TypeError:
            return NotImplemented
        return MTPExpr(self.terms + other.terms, self._align(other))

    __radd__ = __add__

    def __neg__(self) -> "MTPExpr":
        return MTPExpr(tuple((m, -c) for m, c in self.terms), self.variable)

    def __sub__(self, other) -> "MTPExpr":
        try:
            other = self._coerce(other, self.variable)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "MTPExpr":
        return self._coerce(other, self.variable) - self

    def __mul__(self, other) -> "MTPExpr":
        try:
            other = self._coerce(other, self.variable)
        except TypeError:
            return NotImplemented
        variable = self._align(other)
        terms = [
            (m1 * m2, c1 * c2)
            for m1, c1 in self.terms
            for m2, c2 in other.terms
        ]
        return MTPExpr(tuple(terms), variable)

    __rmul__ = __mul__

    def reciprocal(self) -> "MTPExpr":
        """Inverse of a single-term expression."""
        if not self.is_single_term:
            raise InputError(f"division by the sum {self} is not supported")
        monomial, coefficient = self.terms[0]
        nonzero = [(i, c) for i, c in enumerate(coefficient.coefficients) if c != 0]
        if len(nonzero) != 1:
            raise InputError(f"division by the sum {coefficient} is not supported")
        power, c = nonzero[0]
        inverse = Monomial(monomial.var_power, monomial.atoms, monomial.pi_power + power).inverse()
        return MTPExpr(((inverse, PiPoly.const(1 / c)),), self.variable)

    def __truediv__(self, other) -> "MTPExpr":
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        try:
            other = self._coerce(other, self.variable)
        except TypeError:
            return NotImplemented
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "MTPExpr":
        return self._coerce(other, self.variable) * self.reciprocal()

    def __pow__(self, exponent: int) -> "MTPExpr":
        if exponent < 0:
            return self.reciprocal() ** (-exponent)
        result = MTPExpr.const(1, self.variable)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    # Evaluation and display

    def evaluate(self, ctx, value):
        total = ctx.mpf(0)
        for monomial, coefficient in self.terms:
            term = coefficient.evaluate(ctx)
            if monomial.var_power:
                term *= ctx.power(value, monomial.var_power)
            for atom, exponent in monomial.atoms:
                term *= ctx.power(atom.evaluate(ctx, value), exponent)
            if monomial.pi_power:
                term *= ctx.power(ctx.pi, monomial.pi_power)
            total += term
        return total

    def render(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for monomial, coefficient in self.terms:
            factors = monomial.factors(self.variable)
            single = sum(1 for r in coefficient.coefficients if r != 0) == 1
            negative = single and coefficient.leading < 0
            if single:
                magnitude = -coefficient if negative else coefficient
                if factors and magnitude == ONE:
                    body = "*".join(factors)
                else:
                    body = "*".join([str(magnitude)] + factors)
            else:
                body = "*".join([f"({coefficient})"] + factors)
            if not parts:
                parts.append(f"-{body}" if negative else body)
            else:
                parts.append(f"- {body}" if negative else f"+ {body}")
        return " ".join(parts)

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"MTPExpr({self})"


def pretty(expr: MTPExpr) -> str:
    """Canonical text of an expression; parsing it gives the expression back."""
    return expr.render()


def as_polynomial(expr: MTPExpr) -> Optional[Poly]:
    """The expression as a polynomial in its variable, if it is one."""
    coefficients: Dict[int, PiPoly] = {}
    for monomial, coefficient in expr.terms:
        if monomial.atoms or monomial.pi_power or monomial.var_power < 0:
            return None
        coefficients[monomial.var_power] = coefficient
    size = max(coefficients, default=-1) + 1
    return Poly(tuple(coefficients.get(i, ZERO) for i in range(size)))


# ---------------------------------------------------------------------------
# Fourier form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FourierForm:
    """``constant(v) + sum cos_k(v) cos(k v) + sum sin_k(v) sin(k v)`` with polynomial parts."""

    constant: Poly = field(default_factory=Poly)
    cos: Tuple[Tuple[int, Poly], ...] = ()
    sin: Tuple[Tuple[int, Poly], ...] = ()
    variable: str = "t"

    def __post_init__(self):
        for name in ("cos", "sin"):
            parts = tuple(sorted(((k, p) for k, p in getattr(self, name) if not p.is_zero)))
            object.__setattr__(self, name, parts)

    @property
    def is_zero(self) -> bool:
        return self.constant.is_zero and not self.cos and not self.sin

    def keys(self) -> List[Tuple[str, int]]:
        return [("cos", k) for k, _ in self.cos] + [("sin", k) for k, _ in self.sin]

    def component(self, kind: str, k: int) -> Poly:
        for key, poly in getattr(self, kind):
            if key == k:
                return poly
        return Poly()

    def __add__(self, other: "FourierForm") -> "FourierForm":
        if not isinstance(other, FourierForm):
            return NotImplemented
        return FourierForm(
            self.constant + other.constant,
            _merge(self.cos, other.cos),
            _merge(self.sin, other.sin),
            self.variable,
        )

    def __mul__(self, scalar: Scalar) -> "FourierForm":
        return FourierForm(
            self.constant * scalar,
            tuple((k, p * scalar) for k, p in self.cos),
            tuple((k, p * scalar) for k, p in self.sin),
            self.variable,
        )

    __rmul__ = __mul__

    def evaluate(self, ctx, value):
        total = self.constant.evaluate(ctx, value)
        for k, p in self.cos:
            total += p.evaluate(ctx, value) * ctx.cos(k * value)
        for k, p in self.sin:
            total += p.evaluate(ctx, value) * ctx.sin(k * value)
        return total

    def render(self) -> str:
        v = self.variable
        parts = []
        for kind in ("cos", "sin"):
            for k, p in reversed(getattr(self, kind)):
                argument = v if k == 1 else f"{k}*{v}"
                parts.append(f"({p.render(v)})*{kind}({argument})")
        if not self.constant.is_zero or not parts:
            parts.append(self.constant.render(v))
        return " + ".join(parts)

    def __str__(self) -> str:
        return self.render()


def _merge(a: Tuple[Tuple[int, Poly], ...], b: Tuple[Tuple[int, Poly], ...]):
    merged: Dict[int, Poly] = dict(a)
    for k, p in b:
        merged[k] = merged.get(k, Poly()) + p
    return tuple(merged.items())


_ANGLE = sp.Symbol("v", real=True)
_TRIG = {"sin": sp.sin, "cos": sp.cos}


def _trig_key(term: sp.Expr) -> Tuple[Tuple[str, int], Fraction]:
    coefficient, factor = term.as_coeff_Mul()
    value = Fraction(int(coefficient.p), int(coefficient.q))
    if factor == 1:
        return ("c", 0), value
    if factor.func not in (sp.sin, sp.cos):
        raise ArithmeticError(f"product-to-sum left a non-linear term {term}")
    multiple, _ = factor.args[0].as_coeff_Mul()
    return ("c" if factor.func == sp.cos else "s", int(multiple)), value


@lru_cache(maxsize=4096)
def _expand_atoms(atoms: Tuple[Tuple[Atom, int], ...]) -> Tuple[Tuple[Tuple[str, int], Fraction], ...]:
    """Product of sin/cos powers as a sum of cos(k v) and sin(k v), k >= 0."""
    product = sp.Mul(*(_TRIG[atom.func](atom.mult * _ANGLE) ** exponent for atom, exponent in atoms))
    linear = sp.expand(TR8(product))
    acc: Dict[Tuple[str, int], Fraction] = {}
    for term in sp.Add.make_args(linear):
        key, value = _trig_key(term)
        acc[key] = acc.get(key, Fraction(0)) + value
    return tuple(sorted((key, value) for key, value in acc.items() if value != 0))


def to_fourier_form(expr: MTPExpr) -> FourierForm:
    """
    Rewrite an arctan-free expression with multiple-angle identities.

    Raises:
        StepError: inverse-function atoms or denominators are present
    """
    constant = Poly()
    cos: Dict[int, Poly] = {}
    sin: Dict[int, Poly] = {}
    for monomial, coefficient in expr.terms:
        if monomial.has_denominator:
            raise StepError(f"cannot expand {expr}: it still has denominators")
        for atom, _ in monomial.atoms:
            if atom.is_inverse:
                raise StepError(
                    f"cannot expand {atom.render(expr.variable)}: apply a bound first",
                    details={"atom": atom.selector(expr.variable)},
                )
        for (kind, k), c in _expand_atoms(monomial.atoms):
            part = Poly.monomial(monomial.var_power, coefficient * c)
            if kind == "c" and k == 0:
                constant = constant + part
            elif kind == "c":
                cos[k] = cos.get(k, Poly()) + part
            else:
                sin[k] = sin.get(k, Poly()) + part
    return FourierForm(constant, tuple(cos.items()), tuple(sin.items()), expr.variable)


# ---------------------------------------------------------------------------
# Substitutions
# ---------------------------------------------------------------------------

_REFLECTED = {SIN: COS, COS: SIN, ATAN_SIN: ATAN_COS, ATAN_COS: ATAN_SIN}


def reflect(expr: MTPExpr) -> MTPExpr:
    """
    Substitute t -> pi/2 - t.

    Raises:
        StepError: multiple-angle atoms, arctan/arcsin of t, or negative powers of t
    """
    if expr.variable != "t":
        raise StepError("reflection applies to expressions in t")

    terms = []
    for monomial, coefficient in expr.terms:
        if monomial.var_power < 0:
            raise StepError(f"cannot reflect the negative power t^{monomial.var_power}")
        atoms = []
        for atom, exponent in monomial.atoms:
            if atom not in _REFLECTED:
                raise StepError(
                    f"cannot reflect {atom.render('t')}",
                    details={"atom": atom.selector("t")},
                )
            atoms.append((_REFLECTED[atom], exponent))
        p = monomial.var_power
        for j in range(p + 1):
            binomial = HALF_PI ** (p - j) * (math.comb(p, j) * (-1) ** j)
            terms.append((Monomial(j, tuple(atoms), monomial.pi_power), coefficient * binomial))
    return MTPExpr(tuple(terms), "t")


_ENDPOINT_ARCSIN = {Fraction(0): ZERO, Fraction(1, 2): PiPoly.pi_power(1, Fraction(1, 6)), Fraction(1): HALF_PI}


def arcsin_endpoint(value: PiPoly) -> PiPoly:
    """arcsin of an x-interval endpoint among 0, 1/2 and 1."""
    if value.is_constant and value.constant_value in _ENDPOINT_ARCSIN:
        return _ENDPOINT_ARCSIN[value.constant_value]
    raise StepError(f"x = sin t maps only the endpoints 0, 1/2 and 1, got {value}")


def substitute_sin(expr: MTPExpr) -> MTPExpr:
    """
    Substitute x = sin t: x -> sin t, asin(x) -> t, atan(x) -> atan(sin t).

    Raises:
        StepError: the expression has factors the substitution cannot eliminate
    """
    if expr.variable != "x" and expr.depends_on_variable:
        raise StepError("x = sin t applies to expressions in x")

    terms = []
    for monomial, coefficient in expr.terms:
        var_power = 0
        atoms = [(SIN, monomial.var_power)]
        for atom, exponent in monomial.atoms:
            if atom == ASIN_VAR:
                var_power += exponent
            elif atom == ATAN_VAR:
                atoms.append((ATAN_SIN, exponent))
            else:
                raise StepError(
                    f"non-eliminable composition {atom.render('x')} under x = sin t",
                    details={"atom": atom.selector("x")},
                )
        terms.append((Monomial(var_power, tuple(atoms), monomial.pi_power), coefficient))
    return MTPExpr(tuple(terms), "t")


# ---------------------------------------------------------------------------
# Positivity patterns and side conditions
# ---------------------------------------------------------------------------

def _below(value: PiPoly, bound: PiPoly, open_end: bool) -> bool:
    sign = pipoly_sign(bound - value)
    return sign > 0 or (sign == 0 and open_end)


def variable_positive(interval: IntervalQPi) -> bool:
    """v > 0 on the interval."""
    sign = pipoly_sign(interval.lo)
    return sign > 0 or (sign == 0 and interval.lo_open)


def factor_positive(atom: Atom, interval: IntervalQPi) -> bool:
    """Whether an atom is positive everywhere on the interval (which must lie right of 0)."""
    if not variable_positive(interval):
        return False
    if atom.func in ("atan", "asin") and atom.inner == VAR:
        return True
    if atom.func == "sin" or atom.inner == "sin":
        return _below(interval.hi * atom.mult, PI, interval.hi_open)
    return _below(interval.hi * atom.mult, HALF_PI, interval.hi_open)


def monomial_positive(monomial: Monomial, interval: IntervalQPi) -> bool:
    if monomial.var_power and not variable_positive(interval):
        return False
    return all(factor_positive(atom, interval) for atom, _ in monomial.atoms)


def term_sign(monomial: Monomial, coefficient: PiPoly, interval: IntervalQPi) -> Optional[int]:
    """Sign of one term decided by patterns, or None."""
    if not monomial_positive(monomial, interval):
        return None
    return pipoly_sign(coefficient)


def positive_pattern(expr: MTPExpr, interval: IntervalQPi) -> Optional[str]:
    """Name of the syntactic pattern that makes ``expr`` positive, if any."""
    if not expr.is_single_term:
        return None
    monomial, coefficient = expr.terms[0]
    if term_sign(monomial, coefficient, interval) != 1:
        return None
    return "positive-constant" if monomial.is_one else "positive-monomial"


def strip_positive_factors(expr: MTPExpr, interval: IntervalQPi) -> Tuple[MTPExpr, MTPExpr]:
    """
    Split off the largest monomial common to all terms that is positive on the interval.

    Returns:
        (stripped monomial as an expression, remaining cofactor)
    """
    if expr.is_zero:
        return MTPExpr.const(1, expr.variable), expr
    monomials = [m for m, _ in expr.terms]
    var_power = 0
    if variable_positive(interval):
        var_power = max(min(m.var_power for m in monomials), 0)
    common = []
    for atom in expr.atoms():
        lowest = min(m.exponent(atom) for m in monomials)
        if lowest > 0 and factor_positive(atom, interval):
            common.append((atom, lowest))
    stripped = MTPExpr(((Monomial(var_power, tuple(common)), ONE),), expr.variable)
    if stripped.terms[0][0].is_one:
        return stripped, expr
    return stripped, expr / stripped


@dataclass(frozen=True)
class SideCondition:
    """
    A positivity obligation raised by a step.

    ``expr > 0`` on ``interval``; discharged by ``pattern`` or else by proving
    ``goal_expr > 0`` where ``expr = stripped * goal_expr`` and ``stripped`` is
    pattern-positive.
    """

    description: str
    expr: MTPExpr
    interval: IntervalQPi
    pattern: Optional[str]
    stripped: MTPExpr
    goal_expr: MTPExpr

    @property
    def discharged(self) -> bool:
        return self.pattern is not None


def side_condition(expr: MTPExpr, interval: IntervalQPi, description: Optional[str] = None) -> SideCondition:
    """Build the obligation ``expr > 0`` on the interval, resolving patterns."""
    pattern = positive_pattern(expr, interval)
    stripped, rest = strip_positive_factors(expr, interval)
    return SideCondition(
        description=description or f"{expr} > 0 on {interval}",
        expr=expr,
        interval=interval,
        pattern=pattern,
        stripped=stripped,
        goal_expr=rest,
    )


def mul_positive(expr: MTPExpr, multiplier: MTPExpr, interval: IntervalQPi) -> Tuple[MTPExpr, SideCondition]:
    """
    Multiply by an expression that must be positive on the interval.

    Returns:
        (product, side condition ``multiplier > 0``)
    """
    product = expr * multiplier
    condition = side_condition(multiplier, interval)
    logger.debug(f"Multiplying by {multiplier}: side condition pattern {condition.pattern}")
    return product, condition


def clearing_multiplier(expr: MTPExpr) -> MTPExpr:
    """Smallest positive monomial whose product with ``expr`` has no denominators."""
    var_power = max((-m.var_power for m, _ in expr.terms), default=0)
    pi_power = max((-m.pi_power for m, _ in expr.terms), default=0)
    atoms = []
    for atom in expr.atoms():
        need = max(-m.exponent(atom) for m, _ in expr.terms)
        if need > 0:
            atoms.append((atom, need))
    monomial = Monomial(max(var_power, 0), tuple(atoms), 0)
    return MTPExpr(((monomial, PiPoly.pi_power(max(pi_power, 0))),), expr.variable)
