"""
One-sided Taylor bounds for sin, cos and arctan, and their application.

For y in (0, sqrt((k+3)(k+4))) the degree-k Maclaurin polynomials of sin and
cos bound the function from one side, the side alternating with k mod 4. The
arctan polynomials bound arctan on (0, 1] the same way. A bound may replace an
atom only where the coefficient in front of it has the matching sign: a lower
bound under a positive coefficient, an upper bound under a negative one.
"""

import logging
import math
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from ..utils.error_handling import BoundError, EndpointRootError, InputError, NotPositiveError
from .coeff import HALF_PI, ZERO, PiPoly, pipoly_sign
from .mtp import (
    ATAN_COS,
    COS,
    SIN,
    VAR,
    Atom,
    FourierForm,
    Monomial,
    MTPExpr,
    SideCondition,
    side_condition,
    term_sign,
    variable_positive,
)
from .poly import IntervalQPi, Poly, factor_monomial, prove_positive

logger = logging.getLogger(__name__)

BOUND_FUNCTIONS = ("sin", "cos", "arctan")
_FUNCTION_ALIASES = {"atan": "arctan"}


class Direction(str, Enum):
    LOWER = "lower"
    UPPER = "upper"


def normalize_function(name: str) -> str:
    name = _FUNCTION_ALIASES.get(name, name)
    if name not in BOUND_FUNCTIONS:
        raise BoundError(f"no bounds for function {name!r}")
    return name


def expected_direction(function: str, degree: int) -> Direction:
    """
    Side on which the degree-k Maclaurin polynomial lies.

    Raises:
        BoundError: degree has the wrong parity for the function
    """
    function = normalize_function(function)
    if degree < 0:
        raise BoundError(f"negative degree {degree}")
    if function == "cos":
        if degree % 2:
            raise BoundError(f"cos bounds have even degree, got {degree}")
        return Direction.UPPER if degree % 4 == 0 else Direction.LOWER
    if degree % 2 == 0:
        raise BoundError(f"{function} bounds have odd degree, got {degree}")
    return Direction.UPPER if degree % 4 == 1 else Direction.LOWER


def taylor_poly(function: str, degree: int) -> Poly:
    """Maclaurin polynomial of sin, cos or arctan with rational coefficients."""
    function = normalize_function(function)
    expected_direction(function, degree)
    coefficients = [Fraction(0)] * (degree + 1)
    start = 0 if function == "cos" else 1
    for power in range(start, degree + 1, 2):
        sign = -1 if (power // 2) % 2 else 1
        if function == "arctan":
            coefficients[power] = Fraction(sign, power)
        else:
            coefficients[power] = Fraction(sign, math.factorial(power))
    return Poly.from_rationals(coefficients)


def validity_radius_squared(degree: int) -> int:
    """(k+3)(k+4): the square of the admissible radius for sin/cos bounds."""
    return (degree + 3) * (degree + 4)


@dataclass(frozen=True)
class BoundRule:
    """A one-sided Taylor bound; direction must agree with the table."""

    function: str
    degree: int
    direction: Direction

    def __post_init__(self):
        object.__setattr__(self, "function", normalize_function(self.function))
        object.__setattr__(self, "direction", Direction(self.direction))
        expected = expected_direction(self.function, self.degree)
        if expected != self.direction:
            raise BoundError(
                f"{self.function} of degree {self.degree} is a {expected.value} bound, "
                f"not {self.direction.value}",
                details={"function": self.function, "degree": self.degree},
            )

    @property
    def polynomial(self) -> Poly:
        return taylor_poly(self.function, self.degree)

    @property
    def validity(self) -> str:
        if self.function == "arctan":
            return "argument in (0, 1]"
        return f"argument in (0, sqrt({validity_radius_squared(self.degree)}))"

    @property
    def label(self) -> str:
        return f"{self.function} {self.direction.value} {self.degree}"

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class BoundSpec:
    """One ``bound`` directive: a rule addressed to an atom selector."""

    function: str
    direction: str
    degree: int
    selector: str

    @property
    def rule(self) -> BoundRule:
        return BoundRule(self.function, self.degree, Direction(self.direction))

    def __str__(self) -> str:
        return f"bound {self.function} {self.direction} {self.degree} @ {self.selector}"


_TRIG_SELECTOR = re.compile(r"^(sin|cos)@(\d*)([a-z])$")
_ATAN_SELECTOR = re.compile(r"^(?:atan|arctan)@(sin|cos|[a-z])$")


def selector_is_wellformed(text: str) -> bool:
    """Whether text has the shape of an atom selector, whatever the variable."""
    return bool(_TRIG_SELECTOR.match(text) or _ATAN_SELECTOR.match(text))


def parse_selector(text: str, variable: str) -> Atom:
    """
    Atom addressed by a selector such as ``cos@8t``, ``sin@t`` or ``atan@sin``.

    Raises:
        InputError: malformed selector or a different variable
    """
    match = _TRIG_SELECTOR.match(text)
    if match:
        func, mult, letter = match.groups()
        if letter != variable:
            raise InputError(f"selector {text!r} does not use the variable {variable}")
        multiplier = int(mult) if mult else 1
        if multiplier < 1:
            raise InputError(f"malformed selector {text!r}")
        return Atom(func, multiplier)
    match = _ATAN_SELECTOR.match(text)
    if match:
        inner = match.group(1)
        if inner in ("sin", "cos"):
            return Atom("atan", inner=inner)
        if inner != variable:
            raise InputError(f"selector {text!r} does not use the variable {variable}")
        return Atom("atan")
    raise InputError(f"malformed selector {text!r}")


def bound_table(max_degree: int = 23) -> List[Dict[str, str]]:
    """Rows (function, degree, direction, validity) of the admissible rules."""
    rows = []
    for function in BOUND_FUNCTIONS:
        for degree in range(max_degree + 1):
            try:
                rule = BoundRule(function, degree, expected_direction(function, degree))
            except BoundError:
                continue
            rows.append(
                {
                    "function": function,
                    "degree": str(degree),
                    "direction": rule.direction.value,
                    "validity": rule.validity,
                }
            )
    return rows


def render_bound_table(max_degree: int = 23) -> str:
    lines = ["| function | degree | direction | valid for |", "|---|---|---|---|"]
    for row in bound_table(max_degree):
        lines.append(f"| {row['function']} | {row['degree']} | {row['direction']} | {row['validity']} |")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Validity checks
# ---------------------------------------------------------------------------

def check_trig_validity(rule: BoundRule, multiplier: int, interval: IntervalQPi) -> str:
    """
    Check m * t stays inside (0, sqrt((k+3)(k+4))) on the interval.

    Returns:
        Evidence string
    """
    if not variable_positive(interval):
        raise BoundError(f"{rule} needs a positive argument, interval is {interval}")
    radius = validity_radius_squared(rule.degree)
    top = interval.hi * multiplier
    if pipoly_sign(PiPoly.const(radius) - top * top) <= 0:
        raise BoundError(
            f"validity radius exceeded for {rule}: ({top})^2 is not below {radius}",
            details={"rule": rule.label, "sup": str(top), "radius_squared": radius},
        )
    return f"({top})^2 < {radius}"


def check_arctan_validity(rule: BoundRule, atom: Atom, interval: IntervalQPi) -> str:
    """Check the arctan argument stays in (0, 1) on the interval."""
    if not variable_positive(interval):
        raise BoundError(f"{rule} needs a positive argument, interval is {interval}")
    limit = PiPoly.const(1) if atom.inner == VAR else HALF_PI
    sign = pipoly_sign(limit - interval.hi)
    if sign < 0 or (sign == 0 and not interval.hi_open):
        raise BoundError(
            f"{rule} needs the argument in (0, 1); interval {interval} reaches {limit}",
            details={"rule": rule.label},
        )
    return f"argument of {atom.render('v')} in (0, 1) on {interval}"


def _scaled_taylor(rule: BoundRule, multiplier: int) -> Poly:
    """T(m * v) as a polynomial in v."""
    poly = rule.polynomial
    return Poly(tuple(c * Fraction(multiplier) ** i for i, c in enumerate(poly.coefficients)))


# ---------------------------------------------------------------------------
# Application to arctan atoms
# ---------------------------------------------------------------------------

_ATAN_BASE = {"sin": SIN, "cos": COS, VAR: None}


def _group_specs(specs: Sequence[BoundSpec], variable: str) -> Dict[Atom, List[BoundSpec]]:
    grouped: Dict[Atom, List[BoundSpec]] = {}
    for spec in specs:
        grouped.setdefault(parse_selector(spec.selector, variable), []).append(spec)
    return grouped


def _split_by_atom(expr: MTPExpr, atom: Atom) -> Tuple[List[Tuple[Monomial, PiPoly]], List[Tuple[Monomial, PiPoly]]]:
    with_atom, without = [], []
    for monomial, coefficient in expr.terms:
        exponent = monomial.exponent(atom)
        if exponent == 0:
            without.append((monomial, coefficient))
        elif exponent == 1:
            with_atom.append((monomial.without(atom), coefficient))
        else:
            raise BoundError(
                f"{atom.render(expr.variable)} appears with exponent {exponent}; bounds replace simple factors only"
            )
    return with_atom, without


def apply_arctan_bounds(
    expr: MTPExpr, interval: IntervalQPi, specs: Sequence[BoundSpec]
) -> Tuple[MTPExpr, List[str], List[SideCondition]]:
    """
    Replace arctan atoms by Taylor bounds, keeping ``expr > result`` on the interval.

    A selector with a lower and an upper rule is applied term by term (each
    term's sign decided by patterns). A selector with a single rule is applied
    to the grouped cofactor, whose sign becomes a side condition.

    Returns:
        (bounded expression, evidence, side conditions)
    """
    variable = expr.variable
    grouped = _group_specs(specs, variable)
    present = [a for a in expr.atoms() if a.func == "atan"]

    for atom in grouped:
        if atom.func != "atan":
            raise BoundError(
                f"{atom.selector(variable)} must be bounded after to-fourier",
                details={"selector": atom.selector(variable)},
            )
        if atom not in present:
            raise BoundError(f"selector {atom.selector(variable)} matches no atom of {expr}")
    for atom in present:
        if atom not in grouped:
            raise BoundError(
                f"unassigned atom {atom.render(variable)}",
                details={"selector": atom.selector(variable)},
            )

    evidence: List[str] = []
    conditions: List[SideCondition] = []
    result = expr
    for atom in present:
        rules = [spec.rule for spec in grouped[atom]]
        for rule in rules:
            if rule.function != "arctan":
                raise BoundError(f"{rule} cannot bound {atom.render(variable)}")
            evidence.append(f"{atom.selector(variable)}: {rule}: {check_arctan_validity(rule, atom, interval)}")

        base = _ATAN_BASE[atom.inner]
        with_atom, without = _split_by_atom(result, atom)
        replaced = MTPExpr(tuple(without), variable)

        if len(rules) == 2:
            by_direction = {rule.direction: rule for rule in rules}
            if len(by_direction) != 2:
                raise BoundError(f"two rules for {atom.selector(variable)} must be one lower and one upper")
            for monomial, coefficient in with_atom:
                term = MTPExpr(((monomial, coefficient),), variable)
                sign = term_sign(monomial, coefficient, interval)
                if sign is None:
                    raise BoundError(
                        f"sign of {term} on {interval} is not decided by a pattern; use a single rule",
                        details={"term": str(term)},
                    )
                rule = by_direction[Direction.LOWER if sign > 0 else Direction.UPPER]
                bound = MTPExpr.from_poly(rule.polynomial, variable, base=base)
                replaced = replaced + term * bound
                evidence.append(f"{atom.selector(variable)}: term {term} has sign {sign:+d}: {rule}")
        elif len(rules) == 1:
            rule = rules[0]
            cofactor = MTPExpr(tuple(with_atom), variable)
            obligation = cofactor if rule.direction == Direction.LOWER else -cofactor
            condition = side_condition(
                obligation,
                interval,
                description=f"cofactor of {atom.render(variable)}: {obligation} > 0 on {interval}",
            )
            conditions.append(condition)
            bound = MTPExpr.from_poly(rule.polynomial, variable, base=base)
            replaced = replaced + cofactor * bound
            evidence.append(f"{atom.selector(variable)}: grouped cofactor {cofactor}: {rule}")
        else:
            raise BoundError(f"{atom.selector(variable)} takes one rule or a lower/upper pair")
        result = replaced

    logger.debug(f"Arctan bounds applied: {len(evidence)} evidence entries")
    return result, evidence, conditions


# ---------------------------------------------------------------------------
# Application to multiple-angle atoms of a Fourier form
# ---------------------------------------------------------------------------

def coefficient_sign(poly: Poly, interval: IntervalQPi) -> Tuple[int, str]:
    """
    Constant sign of a coefficient polynomial on the interval.

    A power of the variable is split off first when the variable is positive
    on the interval, so a root at an open endpoint 0 does not block the count.

    Returns:
        (sign, evidence)

    Raises:
        BoundError: the sign is not constant or cannot be certified
    """
    if poly.is_zero:
        raise BoundError("zero coefficient has no sign")
    if poly.degree == 0:
        return pipoly_sign(poly.coefficients[0]), "sign in Q[pi]"
    power, rest = factor_monomial(poly)
    if power and not variable_positive(interval):
        rest = poly
        power = 0
    if rest.degree == 0:
        return pipoly_sign(rest.coefficients[0]), f"v^{power} times a constant in Q[pi]"
    for sign in (1, -1):
        try:
            verdict = prove_positive(rest * sign, interval)
        except (NotPositiveError, EndpointRootError):
            continue
        return sign, f"Sturm on {interval} (chain of {verdict.chain_length})"
    raise BoundError(f"coefficient {poly} has no certified constant sign on {interval}")


def _coefficient_sign_evidence(poly: Poly, needed: int, interval: IntervalQPi, label: str) -> str:
    try:
        sign, how = coefficient_sign(poly, interval)
    except BoundError as error:
        raise BoundError(f"{label}: {error.message}", details={"selector": label})
    if sign != needed:
        raise BoundError(
            f"coefficient {poly} of {label} has sign {sign:+d}, needs {needed:+d}",
            details={"selector": label},
        )
    return f"coefficient sign {sign:+d} by {how}"


def apply_fourier_bounds(
    form: FourierForm, interval: IntervalQPi, specs: Sequence[BoundSpec]
) -> Tuple[Poly, List[str]]:
    """
    Replace every cos(k v) / sin(k v) of a Fourier form by a Taylor bound.

    Returns:
        (polynomial below the form on the interval, evidence)
    """
    variable = form.variable
    grouped = _group_specs(specs, variable)
    keys = {Atom(kind, k): (kind, k) for kind, k in form.keys()}

    for atom, atom_specs in grouped.items():
        if atom not in keys:
            raise BoundError(f"selector {atom.selector(variable)} matches no atom of the Fourier form")
        if len(atom_specs) != 1:
            raise BoundError(f"{atom.selector(variable)} takes exactly one rule")
    for atom in keys:
        if atom not in grouped:
            raise BoundError(
                f"unassigned atom {atom.render(variable)}",
                details={"selector": atom.selector(variable)},
            )

    evidence: List[str] = []
    result = form.constant
    for atom, (kind, k) in sorted(keys.items(), key=lambda item: item[0].sort_key):
        rule = grouped[atom][0].rule
        label = atom.selector(variable)
        if rule.function != kind:
            raise BoundError(f"{rule} cannot bound {atom.render(variable)}")
        coefficient = form.component(kind, k)
        needed = 1 if rule.direction == Direction.LOWER else -1
        sign_evidence = _coefficient_sign_evidence(coefficient, needed, interval, label)
        validity = check_trig_validity(rule, k, interval)
        evidence.append(f"{label}: {rule}: {sign_evidence}; {validity}")
        result = result + coefficient * _scaled_taylor(rule, k)

    logger.debug(f"Fourier bounds applied to {len(keys)} atoms")
    return result, evidence


# ---------------------------------------------------------------------------
# Secant bound for arctan(cos t)
# ---------------------------------------------------------------------------

def secant_line() -> MTPExpr:
    """pi/4 - t/2, the chord of arctan(cos t) over [0, pi/2]."""
    return MTPExpr.const(PiPoly.pi_power(1, Fraction(1, 4))) - MTPExpr.var("t") * Fraction(1, 2)


def secant_bound_arctan_cos(
    expr: MTPExpr, interval: IntervalQPi
) -> Tuple[MTPExpr, List[str], List[SideCondition]]:
    """
    Replace arctan(cos t) by its chord pi/4 - t/2 on a sub-interval of [0, pi/2].

    arctan(cos t) is concave on [0, pi/2] because its second derivative has
    the sign of -(3 cos t - cos^3 t); that and the cofactor sign become side
    conditions. The chord meets the curve at both ends.

    Returns:
        (bounded expression, evidence, side conditions)
    """
    if expr.variable != "t":
        raise BoundError("the secant bound applies to expressions in t")
    if not interval.within(ZERO, HALF_PI):
        raise BoundError(f"the secant bound needs an interval inside [0, pi/2], got {interval}")
    if not expr.has_atom(ATAN_COS):
        raise BoundError(f"{expr} has no atan(cos(t)) to bound")

    with_atom, without = _split_by_atom(expr, ATAN_COS)
    cofactor = MTPExpr(tuple(with_atom), "t")
    chord = secant_line()
    result = MTPExpr(tuple(without), "t") + cofactor * chord

    conditions = [
        side_condition(
            cofactor,
            interval,
            description=f"cofactor of atan(cos(t)): {cofactor} > 0 on {interval}",
        ),
        side_condition(
            MTPExpr.atom(COS) * 3 - MTPExpr.atom(COS, exponent=3),
            IntervalQPi(ZERO, HALF_PI, True, True),
            description="concavity of atan(cos(t)): 3*cos(t) - cos(t)^3 > 0 on (0, 1/2*pi)",
        ),
    ]

    at_zero = PiPoly.pi_power(1, Fraction(1, 4))
    at_right = at_zero - HALF_PI * Fraction(1, 2)
    if not at_right.is_zero:
        raise BoundError("chord does not vanish at pi/2")
    evidence = [
        f"chord {chord} at t = 0: atan(cos(0)) = atan(1) = {at_zero}",
        f"chord {chord} at t = 1/2*pi: atan(cos(1/2*pi)) = atan(0) = {at_right}",
        f"interval {interval} inside [0, 1/2*pi]",
    ]
    return result, evidence, conditions

