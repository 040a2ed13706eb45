"""
Goals and proof steps.

``execute_step`` is the single place where a step acts on a goal. It is
deterministic: the prover records what it returns and the verifier calls it
again on the recorded goal and compares.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Optional, Tuple, Union

from ..utils.error_handling import NotPositiveError, StepError
from .bounds import BoundSpec, apply_arctan_bounds, apply_fourier_bounds, secant_bound_arctan_cos
from .coeff import HALF_PI, PiPoly, pipoly_sign
from .mtp import (
    FourierForm,
    MTPExpr,
    SideCondition,
    arcsin_endpoint,
    as_polynomial,
    mul_positive,
    positive_pattern,
    reflect,
    substitute_sin,
    to_fourier_form,
    variable_positive,
)
from .poly import (
    IntervalQPi,
    PositivityCertificate,
    Poly,
    factor_monomial,
    normalize_integer,
    prove_positive,
    substitute_square,
)

logger = logging.getLogger(__name__)

GoalExpr = Union[MTPExpr, FourierForm, Poly]


@dataclass(frozen=True)
class Goal:
    """Claim ``expr > 0`` (or ``>= 0`` when not strict) on the interval."""

    expr: GoalExpr
    interval: IntervalQPi
    variable: str = "t"
    strict: bool = True

    @property
    def kind(self) -> str:
        if isinstance(self.expr, MTPExpr):
            return "mtp"
        if isinstance(self.expr, FourierForm):
            return "fourier"
        return "poly"

    @property
    def display_expr(self) -> str:
        if isinstance(self.expr, Poly):
            return self.expr.render(self.variable)
        return self.expr.render()

    def derive(self, expr: GoalExpr, **changes) -> "Goal":
        values = {
            "interval": self.interval,
            "variable": self.variable,
            "strict": self.strict,
            **changes,
        }
        return Goal(expr=expr, **values)

    def __str__(self) -> str:
        relation = ">" if self.strict else ">="
        return f"{self.display_expr} {relation} 0 on {self.interval}"


class StepKind(str, Enum):
    SUBSTITUTE_SIN = "substitute-sin"
    REFLECT = "reflect"
    MUL_POSITIVE = "mul-positive"
    SPLIT = "split"
    APPLY_BOUNDS = "bound"
    SECANT_BOUND = "secant-arctan-cos"
    TO_FOURIER = "to-fourier"
    FACTOR_MONOMIAL = "factor-monomial"
    SUBSTITUTE_SQUARE = "subst-square"
    STURM_DECIDE = "sturm"
    PATTERN_POSITIVE = "pattern-positive"


@dataclass(frozen=True)
class ProofStep:
    """One step with its parameters; ``line`` and ``label`` locate it in a script."""

    kind: StepKind
    point: Optional[PiPoly] = None
    multiplier: Optional[MTPExpr] = None
    bounds: Tuple[BoundSpec, ...] = ()
    label: str = ""
    line: int = 0

    @property
    def command(self) -> str:
        if self.kind == StepKind.SPLIT:
            return f"split {self.point}"
        if self.kind == StepKind.MUL_POSITIVE:
            return f"mul-positive {self.multiplier}"
        if self.kind == StepKind.APPLY_BOUNDS:
            return "; ".join(str(spec) for spec in self.bounds)
        return self.kind.value


@dataclass(frozen=True)
class Verdict:
    """How a leaf goal was closed: Sturm positivity, identically zero, or a pattern."""

    kind: str
    certificate: Optional[PositivityCertificate] = None
    pattern: Optional[str] = None


@dataclass(frozen=True)
class StepOutcome:
    children: Tuple[Goal, ...] = ()
    evidence: Tuple[str, ...] = ()
    side_conditions: Tuple[SideCondition, ...] = ()
    verdict: Optional[Verdict] = None


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _require(goal: Goal, kinds: Tuple[str, ...], step: ProofStep):
    if goal.kind not in kinds:
        raise StepError(
            f"{step.kind.value} does not apply to a {goal.kind} goal",
            details={"goal": str(goal)},
        )


def goal_polynomial(goal: Goal) -> Poly:
    """The goal expression as a polynomial, when it is one."""
    if isinstance(goal.expr, Poly):
        return goal.expr
    if isinstance(goal.expr, FourierForm):
        if goal.expr.keys():
            raise StepError(
                f"{goal.display_expr} still has trigonometric atoms; apply bounds first",
                details={"goal": str(goal)},
            )
        return goal.expr.constant
    poly = as_polynomial(goal.expr)
    if poly is None:
        raise StepError(f"{goal.display_expr} is not a polynomial", details={"goal": str(goal)})
    return poly


def _touches_chord_ends(interval: IntervalQPi) -> bool:
    at_zero = pipoly_sign(interval.lo) == 0 and not interval.lo_open
    at_right = pipoly_sign(HALF_PI - interval.hi) == 0 and not interval.hi_open
    return at_zero or at_right


# ---------------------------------------------------------------------------
# Step implementations
# ---------------------------------------------------------------------------

def _substitute_sin(goal: Goal, step: ProofStep) -> StepOutcome:
    _require(goal, ("mtp",), step)
    if goal.variable != "x":
        raise StepError("substitute-sin needs a goal in x")
    interval = IntervalQPi(
        arcsin_endpoint(goal.interval.lo),
        arcsin_endpoint(goal.interval.hi),
        goal.interval.lo_open,
        goal.interval.hi_open,
    )
    child = Goal(substitute_sin(goal.expr), interval, "t", goal.strict)
    evidence = (
        f"x = sin(t) maps {goal.interval} onto {interval}",
        "asin(sin(t)) = t for t in [0, 1/2*pi]",
    )
    return StepOutcome(children=(child,), evidence=evidence)


def _reflect(goal: Goal, step: ProofStep) -> StepOutcome:
    _require(goal, ("mtp",), step)
    interval = goal.interval.reflected()
    child = goal.derive(reflect(goal.expr), interval=interval)
    return StepOutcome(children=(child,), evidence=(f"t -> 1/2*pi - t maps {goal.interval} onto {interval}",))


def _mul_positive(goal: Goal, step: ProofStep) -> StepOutcome:
    _require(goal, ("mtp",), step)
    if step.multiplier is None:
        raise StepError("mul-positive needs a multiplier")
    product, condition = mul_positive(goal.expr, step.multiplier, goal.interval)
    child = goal.derive(product)
    evidence = (f"multiplied by {step.multiplier}",)
    return StepOutcome(children=(child,), evidence=evidence, side_conditions=(condition,))


def _split(goal: Goal, step: ProofStep) -> StepOutcome:
    if step.point is None:
        raise StepError("split needs a point")
    left, right = goal.interval.split(step.point)
    children = (goal.derive(goal.expr, interval=left), goal.derive(goal.expr, interval=right))
    return StepOutcome(children=children, evidence=(f"{goal.interval} = {left} u {right}",))


def _apply_bounds(goal: Goal, step: ProofStep) -> StepOutcome:
    _require(goal, ("mtp", "fourier"), step)
    if not step.bounds:
        raise StepError("bound step without rules")
    if goal.kind == "mtp":
        expr, evidence, conditions = apply_arctan_bounds(goal.expr, goal.interval, step.bounds)
        child = goal.derive(expr, strict=False)
        return StepOutcome(children=(child,), evidence=tuple(evidence), side_conditions=tuple(conditions))
    poly, evidence = apply_fourier_bounds(goal.expr, goal.interval, step.bounds)
    return StepOutcome(children=(goal.derive(poly, strict=False),), evidence=tuple(evidence))


def _secant_bound(goal: Goal, step: ProofStep) -> StepOutcome:
    _require(goal, ("mtp",), step)
    expr, evidence, conditions = secant_bound_arctan_cos(goal.expr, goal.interval)
    strict = goal.strict if _touches_chord_ends(goal.interval) else False
    child = goal.derive(expr, strict=strict)
    return StepOutcome(children=(child,), evidence=tuple(evidence), side_conditions=tuple(conditions))


def _to_fourier(goal: Goal, step: ProofStep) -> StepOutcome:
    _require(goal, ("mtp",), step)
    form = to_fourier_form(goal.expr)
    if form.is_zero and goal.strict:
        raise NotPositiveError(f"{goal.display_expr} is identically zero", witness_sign=0)
    keys = ", ".join(f"{kind}({k}*{goal.variable})" for kind, k in form.keys()) or "none"
    return StepOutcome(children=(goal.derive(form),), evidence=(f"multiple-angle atoms: {keys}",))


def _factor_monomial(goal: Goal, step: ProofStep) -> StepOutcome:
    p = goal_polynomial(goal)
    m, q = factor_monomial(p)
    if m and not variable_positive(goal.interval):
        raise StepError(f"{goal.variable}^{m} is not positive on {goal.interval}")
    scale, normalized = normalize_integer(q)
    child = goal.derive(normalized)
    evidence = (f"{goal.variable}^{m} * {scale} * q",)
    return StepOutcome(children=(child,), evidence=evidence)


def _substitute_square(goal: Goal, step: ProofStep) -> StepOutcome:
    p = goal_polynomial(goal)
    q = substitute_square(p)
    interval = goal.interval.squared()
    child = Goal(q, interval, "z", goal.strict)
    evidence = (f"z = {goal.variable}^2 maps {goal.interval} onto {interval}",)
    return StepOutcome(children=(child,), evidence=evidence)


def _sturm(goal: Goal, step: ProofStep) -> StepOutcome:
    p = goal_polynomial(goal)
    if p.is_zero:
        if goal.strict:
            raise NotPositiveError(f"{goal.display_expr} is identically zero", witness_sign=0)
        return StepOutcome(evidence=("identically zero",), verdict=Verdict(kind="zero"))
    certificate = prove_positive(p, goal.interval)
    evidence = [
        f"roots in {goal.interval}: {certificate.root_count}",
        f"Sturm chain length {certificate.chain_length}",
        f"sign at {goal.variable} = {certificate.sample}: {certificate.sample_sign:+d}",
    ]
    for endpoint, sign in certificate.endpoint_signs.items():
        evidence.append(f"sign at closed endpoint {endpoint}: {sign:+d}")
    return StepOutcome(evidence=tuple(evidence), verdict=Verdict(kind="positive", certificate=certificate))


def _pattern_positive(goal: Goal, step: ProofStep) -> StepOutcome:
    _require(goal, ("mtp",), step)
    pattern = positive_pattern(goal.expr, goal.interval)
    if pattern is None:
        raise StepError(f"no positivity pattern matches {goal.display_expr} on {goal.interval}")
    return StepOutcome(evidence=(f"pattern {pattern}",), verdict=Verdict(kind="pattern", pattern=pattern))


_HANDLERS: Dict[StepKind, Callable[[Goal, ProofStep], StepOutcome]] = {
    StepKind.SUBSTITUTE_SIN: _substitute_sin,
    StepKind.REFLECT: _reflect,
    StepKind.MUL_POSITIVE: _mul_positive,
    StepKind.SPLIT: _split,
    StepKind.APPLY_BOUNDS: _apply_bounds,
    StepKind.SECANT_BOUND: _secant_bound,
    StepKind.TO_FOURIER: _to_fourier,
    StepKind.FACTOR_MONOMIAL: _factor_monomial,
    StepKind.SUBSTITUTE_SQUARE: _substitute_square,
    StepKind.STURM_DECIDE: _sturm,
    StepKind.PATTERN_POSITIVE: _pattern_positive,
}


def execute_step(goal: Goal, step: ProofStep) -> StepOutcome:
    """
    Apply one step to a goal.

    Args:
        goal: Goal the step acts on
        step: Step with its parameters

    Returns:
        Child goals, evidence strings, side conditions and, for closing steps, a verdict

    Raises:
        StepError: the step's precondition does not hold
        PrecisionError: a sign could not be decided within the precision cap
    """
    logger.debug(f"Executing {step.command} on {goal}")
    return _HANDLERS[step.kind](goal, step)


def is_degenerate(goal: Goal) -> bool:
    """Whether the goal expression is identically zero after normalization."""
    if isinstance(goal.expr, Poly):
        return goal.expr.is_zero
    if isinstance(goal.expr, FourierForm):
        return goal.expr.is_zero
    if goal.expr.is_zero:
        return True
    if goal.expr.has_denominator or any(a.is_inverse for a in goal.expr.atoms()):
        return False
    return to_fourier_form(goal.expr).is_zero


def side_condition_goal(condition: SideCondition) -> Goal:
    """Goal proving an undischarged side condition."""
    return Goal(condition.goal_expr, condition.interval, condition.goal_expr.variable, True)


__all__ = [
    "Goal",
    "GoalExpr",
    "ProofStep",
    "StepKind",
    "StepOutcome",
    "Verdict",
    "execute_step",
    "goal_polynomial",
    "is_degenerate",
    "side_condition_goal",
]
