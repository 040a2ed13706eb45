"""
Proof engine: script execution, automatic search and certificate assembly.

A proof is a tree of ``ProofNode``s. Every node records the goal, the step
applied to it, the evidence and side conditions the step produced and the
child goals' nodes. Leaves carry a verdict. The verifier replays this tree
with ``execute_step`` alone.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from ..config import settings
from ..services.numeric import Counterexample, numeric_context, numeric_falsify
from ..utils.error_handling import (
    BoundError,
    PrecisionError,
    ProverException,
    StepError,
)
from .bounds import (
    BoundSpec,
    Direction,
    coefficient_sign,
    expected_direction,
    secant_line,
    taylor_poly,
    validity_radius_squared,
)
from .coeff import (
    HALF_PI,
    PiPoly,
    as_pipoly,
    pipoly_sign,
    precision_cap,
    precision_tracker,
    rational_bounds,
)
from .mtp import (
    ATAN_COS,
    VAR,
    Atom,
    FourierForm,
    MTPExpr,
    SideCondition,
    clearing_multiplier,
    positive_pattern,
    variable_positive,
)
from .poly import IntervalQPi, Poly, factor_monomial, rational_between
from .steps import (
    Goal,
    ProofStep,
    StepKind,
    StepOutcome,
    Verdict,
    execute_step,
    goal_polynomial,
    is_degenerate,
    side_condition_goal,
)

logger = logging.getLogger(__name__)

STATUS_PROVED = "proved"
STATUS_FAILED = "failed"
STATUS_DISPROVED = "disproved"


# ---------------------------------------------------------------------------
# Scripts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AutoDirective:
    """Finish the current branch by automatic search."""

    line: int = 0


@dataclass(frozen=True)
class SplitBlock:
    """``split`` followed by the scripts of its left and right cases."""

    step: ProofStep
    left: "Script"
    right: "Script"


ScriptItem = Union[ProofStep, SplitBlock, AutoDirective]


@dataclass(frozen=True)
class Script:
    items: Tuple[ScriptItem, ...] = ()

    def __len__(self) -> int:
        return len(self.items)


# ---------------------------------------------------------------------------
# Proof trees and certificates
# ---------------------------------------------------------------------------

@dataclass
class SideConditionProof:
    """A side condition and, unless a pattern discharged it, the proof of its stripped goal."""

    condition: SideCondition
    proof: Optional["ProofNode"] = None

    @property
    def closed(self) -> bool:
        return self.condition.discharged or (self.proof is not None and self.proof.closed)


@dataclass
class ProofNode:
    goal: Goal
    step: Optional[ProofStep] = None
    evidence: Tuple[str, ...] = ()
    side_conditions: List[SideConditionProof] = field(default_factory=list)
    children: List["ProofNode"] = field(default_factory=list)
    verdict: Optional[Verdict] = None

    @property
    def closed(self) -> bool:
        if self.step is None:
            return False
        if not all(sc.closed for sc in self.side_conditions):
            return False
        if self.verdict is not None:
            return not self.children
        return bool(self.children) and all(child.closed for child in self.children)

    def walk(self) -> Iterator["ProofNode"]:
        """All nodes, side-condition proofs included, depth first."""
        yield self
        for sc in self.side_conditions:
            if sc.proof is not None:
                yield from sc.proof.walk()
        for child in self.children:
            yield from child.walk()

    def leaves(self) -> Iterator["ProofNode"]:
        for node in self.walk():
            if node.verdict is not None:
                yield node


@dataclass
class Failure:
    """Where and why a proof attempt stopped."""

    message: str
    error_code: str
    goal: str
    step: Optional[str] = None
    line: Optional[int] = None
    witness: Optional[str] = None
    details: Dict = field(default_factory=dict)

    @classmethod
    def from_error(
        cls, error: ProverException, goal: Goal, step: Optional[ProofStep] = None
    ) -> "Failure":
        witness = getattr(error, "witness", None)
        return cls(
            message=error.message,
            error_code=error.error_code,
            goal=str(goal),
            step=None if step is None else step.command,
            line=None if step is None or not step.line else step.line,
            witness=None if witness is None else str(witness),
            details={k: v for k, v in error.details.items() if v is not None},
        )

    def describe(self) -> str:
        where = f"line {self.line}: " if self.line else ""
        step = f"{self.step}: " if self.step else ""
        return f"{where}{step}{self.message} [goal {self.goal}]"


@dataclass
class Statistics:
    nodes: int = 0
    sturm_decisions: int = 0
    side_conditions: int = 0
    max_digits: int = 0
    precision_cap: int = 0

    @classmethod
    def of(cls, root: Optional[ProofNode], max_digits: int, cap: int) -> "Statistics":
        stats = cls(max_digits=max_digits, precision_cap=cap)
        if root is None:
            return stats
        for node in root.walk():
            stats.nodes += 1
            stats.side_conditions += len(node.side_conditions)
            if node.verdict is not None and node.verdict.kind == "positive":
                stats.sturm_decisions += 1
        return stats


@dataclass
class Certificate:
    goal: Goal
    root: Optional[ProofNode]
    status: str
    notes: List[str] = field(default_factory=list)
    statistics: Statistics = field(default_factory=Statistics)
    failure: Optional[Failure] = None
    counterexample: Optional[Counterexample] = None

    @property
    def proved(self) -> bool:
        return self.status == STATUS_PROVED


class ProofFailed(StepError):
    """A proof attempt stopped; carries the failure record."""

    def __init__(self, failure: Failure):
        super().__init__(failure.describe(), error_code=failure.error_code, details=failure.details)
        self.failure = failure


# ---------------------------------------------------------------------------
# Step execution with side-condition discharge
# ---------------------------------------------------------------------------

class _Chain:
    """Nodes of single-child steps linked head to tail."""

    def __init__(self):
        self.root: Optional[ProofNode] = None
        self.tail: Optional[ProofNode] = None

    def push(self, node: ProofNode):
        if self.root is None:
            self.root = node
        else:
            self.tail.children.append(node)
        self.tail = node


def _apply(goal: Goal, step: ProofStep, discharge) -> Tuple[ProofNode, StepOutcome]:
    """Execute a step and prove its side conditions; errors become ``ProofFailed``."""
    try:
        outcome = execute_step(goal, step)
    except ProofFailed:
        raise
    except ProverException as error:
        raise ProofFailed(Failure.from_error(error, goal, step))

    proofs = []
    for condition in outcome.side_conditions:
        if condition.discharged:
            proofs.append(SideConditionProof(condition))
            continue
        logger.debug(f"Side condition needs a proof: {condition.description}")
        try:
            proof = discharge(side_condition_goal(condition))
        except ProofFailed as failed:
            raise ProofFailed(
                Failure(
                    message=f"side condition not established: {condition.description}",
                    error_code="SIDE_CONDITION",
                    goal=str(goal),
                    step=step.command,
                    line=step.line or None,
                    details={"cause": failed.failure.describe()},
                )
            )
        proofs.append(SideConditionProof(condition, proof))

    node = ProofNode(
        goal=goal,
        step=step,
        evidence=outcome.evidence,
        side_conditions=proofs,
        verdict=outcome.verdict,
    )
    return node, outcome


# ---------------------------------------------------------------------------
# Automatic search
# ---------------------------------------------------------------------------

_RETRYABLE = ("NOT_POSITIVE", "BOUND_ERROR", "ENDPOINT_ROOT")
_UNCACHED = ("SEARCH_BUDGET",)

GapKey = Tuple[str, ...]


def bisection_point(interval: IntervalQPi) -> Fraction:
    """A short rational in the middle half of the interval."""
    lo, _ = rational_bounds(interval.lo, 30)
    _, hi = rational_bounds(interval.hi, 30)
    quarter = (hi - lo) / 4
    middle = (lo + hi) / 2
    denominator = 1
    while True:
        candidate = middle.limit_denominator(denominator)
        if abs(candidate - middle) <= quarter and interval.contains(candidate, strictly=True):
            return candidate
        denominator *= 2


def choose_degree(
    function: str, multiplier: int, direction: Direction, interval: IntervalQPi, minimum: int, maximum: int
) -> Optional[int]:
    """Smallest table degree >= minimum with the given direction that is valid on the interval."""
    top = interval.hi * multiplier
    for degree in range(max(minimum, 0), maximum + 1):
        try:
            if expected_direction(function, degree) != direction:
                continue
        except BoundError:
            continue
        if function == "arctan" or pipoly_sign(PiPoly.const(validity_radius_squared(degree)) - top * top) > 0:
            return degree
    return None


def check_points(ctx, interval: IntervalQPi, count: int) -> List:
    """Equispaced interior points plus points approaching each end geometrically."""
    lo, hi = interval.lo.evaluate(ctx), interval.hi.evaluate(ctx)
    width = hi - lo
    points = [lo + width * i / (count + 1) for i in range(1, count + 1)]
    for j in range(3, 13):
        points.append(lo + width / 2**j)
        points.append(hi - width / 2**j)
    if not interval.lo_open:
        points.append(lo)
    if not interval.hi_open:
        points.append(hi)
    return points


def taylor_gap(ctx, function: str, degree: int, argument):
    """|f(a) - T_k(a)| for the Maclaurin polynomial of sin, cos or arctan."""
    exact = {"sin": ctx.sin, "cos": ctx.cos, "arctan": ctx.atan}[function](argument)
    return abs(exact - taylor_poly(function, degree).evaluate(ctx, argument))


@dataclass
class DegreePlan:
    """
    Taylor degrees of one attempt.

    ``atan_lower`` and ``atan_upper`` serve every arctan atom; ``minimum``
    holds, per multiple-angle atom, the least degree the next draft may use.
    """

    secant: bool = False
    atan_lower: int = 3
    atan_upper: int = 1
    minimum: Dict[Tuple[str, int], int] = field(default_factory=dict)


@dataclass
class Draft:
    """Steps from a goal down to a bounded polynomial, with what each bound replaced."""

    chain: _Chain
    goal: Optional[Goal] = None
    secant_source: Optional[MTPExpr] = None
    arctan_source: Optional[MTPExpr] = None
    arctan_atoms: Tuple[Atom, ...] = ()
    arctan_paired: bool = True
    fourier_form: Optional[FourierForm] = None
    fourier_specs: Dict[Tuple[str, int], BoundSpec] = field(default_factory=dict)

    def gaps(self, ctx, value, plan: DegreePlan) -> Dict[GapKey, object]:
        """How much each bound gives away at one point, weighted by its cofactor."""
        gaps: Dict[GapKey, object] = {}

        def add(key: GapKey, amount):
            gaps[key] = gaps.get(key, 0) + amount

        if self.secant_source is not None:
            cofactor = _cofactor_value(ctx, value, self.secant_source, ATAN_COS)
            chord = secant_line().evaluate(ctx, value)
            add(("secant",), abs(cofactor * (ATAN_COS.evaluate(ctx, value) - chord)))

        for atom in self.arctan_atoms:
            inner = value if atom.inner == VAR else getattr(ctx, atom.inner)(value)
            if not self.arctan_paired:
                cofactor = _cofactor_value(ctx, value, self.arctan_source, atom)
                add(("atan", "lower"), abs(cofactor) * taylor_gap(ctx, "arctan", plan.atan_lower, inner))
                continue
            for monomial, coefficient in self.arctan_source.terms:
                if monomial.exponent(atom) != 1:
                    continue
                term = MTPExpr(((monomial.without(atom), coefficient),), self.arctan_source.variable)
                cofactor = term.evaluate(ctx, value)
                if cofactor > 0:
                    add(("atan", "lower"), cofactor * taylor_gap(ctx, "arctan", plan.atan_lower, inner))
                else:
                    add(("atan", "upper"), -cofactor * taylor_gap(ctx, "arctan", plan.atan_upper, inner))

        for (kind, k), spec in self.fourier_specs.items():
            component = self.fourier_form.component(kind, k).evaluate(ctx, value)
            add((kind, str(k)), abs(component) * taylor_gap(ctx, kind, spec.degree, k * value))
        return gaps


def _cofactor_value(ctx, value, expr: MTPExpr, atom: Atom):
    total = ctx.mpf(0)
    for monomial, coefficient in expr.terms:
        if monomial.exponent(atom) == 1:
            total += MTPExpr(((monomial.without(atom), coefficient),), expr.variable).evaluate(ctx, value)
    return total


class AutoProver:
    """
    Heuristic search over the step language.

    Goals in x are substituted and cleared of denominators once, at the top.
    Each attempt then drafts a bounded polynomial (arctan sandwich or secant,
    Fourier form, multiple-angle bounds) and checks it numerically against
    the goal. Where the draft falls below zero the bound giving away the most
    at the weakest point gets the next degree of its direction, one atom at a
    time. A draft that passes goes to the exact decision. When degrees run
    out the interval is bisected; right halves ending at pi/2 are reflected.
    Failed subgoals are remembered, side-condition searches share one
    attempt budget and nest at most ``auto_max_nesting`` deep.
    """

    def __init__(self, max_depth: Optional[int] = None, max_degree: Optional[int] = None):
        self.max_depth = settings.auto_max_split_depth if max_depth is None else max_depth
        self.max_degree = settings.auto_max_bound_degree if max_degree is None else max_degree
        self.deepest: Optional[Tuple[int, Failure]] = None
        self.attempts = 0
        self.nesting = 0
        self.failed: Dict[str, Failure] = {}
        self.proved: Dict[str, ProofNode] = {}

    def prove(self, goal: Goal) -> ProofNode:
        """
        Search for a proof of the goal.

        Raises:
            ProofFailed: search exhausted; carries the deepest failure
        """
        self.deepest = None
        self.attempts = 0
        self.nesting = 0
        self.failed = {}
        return self._prove(goal)

    def _prove(self, goal: Goal) -> ProofNode:
        chain = _Chain()
        current = goal
        if current.kind == "mtp":
            if current.variable == "x":
                current = self._prefix(chain, current, ProofStep(StepKind.SUBSTITUTE_SIN))
            if current.expr.has_denominator:
                step = ProofStep(StepKind.MUL_POSITIVE, multiplier=clearing_multiplier(current.expr))
                current = self._prefix(chain, current, step)
        node = self._search(current, 0)
        if chain.root is None:
            return node
        chain.tail.children.append(node)
        return chain.root

    def _prefix(self, chain: _Chain, goal: Goal, step: ProofStep) -> Goal:
        node, outcome = _apply(goal, step, self._side)
        chain.push(node)
        return outcome.children[0]

    def _record(self, depth: int, failure: Failure):
        if self.deepest is None or depth >= self.deepest[0]:
            self.deepest = (depth, failure)

    def _spend(self, goal: Goal):
        self.attempts += 1
        if self.attempts > settings.auto_max_attempts:
            raise ProofFailed(
                Failure(
                    message=f"attempt budget of {settings.auto_max_attempts} drafts exhausted",
                    error_code="SEARCH_BUDGET",
                    goal=str(goal),
                )
            )

    def _search(self, goal: Goal, depth: int) -> ProofNode:
        key = str(goal)
        if key in self.failed:
            raise ProofFailed(self.failed[key])
        try:
            return self._split_search(goal, depth)
        except ProofFailed as failed:
            if failed.failure.error_code not in _UNCACHED:
                self.failed[key] = failed.failure
            raise

    def _split_search(self, goal: Goal, depth: int) -> ProofNode:
        try:
            return self._close(goal)
        except ProofFailed as failed:
            if failed.failure.error_code in _UNCACHED:
                raise
            self._record(depth, failed.failure)

        if depth >= self.max_depth:
            raise ProofFailed(self.deepest[1])

        point = bisection_point(goal.interval)
        logger.debug(f"Splitting {goal} at {point} (depth {depth + 1})")
        node, outcome = _apply(goal, ProofStep(StepKind.SPLIT, point=PiPoly.const(point)), self._side)
        left, right = outcome.children
        node.children.append(self._search(left, depth + 1))
        node.children.append(self._search_right(right, depth + 1))
        return node

    def _search_right(self, goal: Goal, depth: int) -> ProofNode:
        reflectable = (
            goal.kind == "mtp"
            and goal.variable == "t"
            and pipoly_sign(HALF_PI - goal.interval.hi) == 0
        )
        if not reflectable:
            return self._search(goal, depth)
        try:
            node, outcome = _apply(goal, ProofStep(StepKind.REFLECT), self._side)
        except ProofFailed:
            return self._search(goal, depth)
        node.children.append(self._search(outcome.children[0], depth))
        return node

    def _side(self, goal: Goal) -> ProofNode:
        key = str(goal)
        if key in self.proved:
            return self.proved[key]
        if self.nesting >= settings.auto_max_nesting:
            raise ProofFailed(
                Failure(
                    message=f"side conditions nested deeper than {settings.auto_max_nesting}",
                    error_code="SEARCH_BUDGET",
                    goal=key,
                )
            )
        deepest = self.deepest
        self.nesting += 1
        try:
            node = self._prove(goal)
        finally:
            self.nesting -= 1
            self.deepest = deepest
        self.proved[key] = node
        return node

    def _close(self, goal: Goal) -> ProofNode:
        if goal.kind == "mtp" and positive_pattern(goal.expr, goal.interval) is not None:
            node, _ = _apply(goal, ProofStep(StepKind.PATTERN_POSITIVE), self._side)
            return node

        plans = [False]
        if goal.kind == "mtp" and goal.expr.has_atom(ATAN_COS) and goal.interval.within(0, HALF_PI):
            plans = [True, False]
        failure = None
        for secant in plans:
            try:
                return self._escalate(goal, DegreePlan(secant=secant))
            except ProofFailed as failed:
                logger.debug(f"Plan {'secant' if secant else 'taylor'} failed on {goal}: {failed.failure.message}")
                if failed.failure.error_code in _UNCACHED:
                    raise
                failure = failure or failed
        raise failure

    def _escalate(self, goal: Goal, plan: DegreePlan) -> ProofNode:
        ctx = numeric_context(settings.numeric_dps)
        references = []
        for value in check_points(ctx, goal.interval, settings.auto_check_points):
            try:
                reference = goal.expr.evaluate(ctx, value)
            except (ZeroDivisionError, ValueError):
                continue
            if reference > 0:
                references.append((value, reference))

        for _ in range(settings.auto_max_escalations + 1):
            self._spend(goal)
            draft = self._draft(goal, plan)
            ratio, point = self._weakest(ctx, draft, references)
            if ratio is not None and ratio < 0 and self._tighten(ctx, draft, plan, point):
                continue
            try:
                return self._finish(draft)
            except ProofFailed as failed:
                if failed.failure.error_code not in _RETRYABLE:
                    raise
                if point is None or not self._tighten(ctx, draft, plan, point):
                    raise
        raise ProofFailed(
            Failure(
                message=f"degrees not settled after {settings.auto_max_escalations} escalations",
                error_code="BOUND_ERROR",
                goal=str(goal),
            )
        )

    @staticmethod
    def _weakest(ctx, draft: Draft, references) -> Tuple[Optional[object], Optional[object]]:
        """Smallest ratio of the bounded polynomial to the goal over the check points."""
        try:
            poly = goal_polynomial(draft.goal)
        except StepError:
            return None, None
        worst = (None, None)
        for value, reference in references:
            ratio = poly.evaluate(ctx, value) / reference
            if worst[0] is None or ratio < worst[0]:
                worst = (ratio, value)
        return worst

    def _tighten(self, ctx, draft: Draft, plan: DegreePlan, point) -> bool:
        """Raise the degree of the bound that gives away the most at the point."""
        gaps = draft.gaps(ctx, point, plan)
        candidates = [key for key in gaps if not (key == ("atan", "upper") and not draft.arctan_paired)]
        if not candidates:
            return False
        # A capped largest loss ends the escalation.
        key = max(candidates, key=lambda k: gaps[k])
        if not gaps[key] > 0 or key == ("secant",):
            return False
        if key[0] == "atan":
            attribute = f"atan_{key[1]}"
            degree = getattr(plan, attribute) + 4
            if degree > self.max_degree:
                return False
            setattr(plan, attribute, degree)
        else:
            kind, k = key[0], int(key[1])
            spec = draft.fourier_specs[(kind, k)]
            direction = Direction(spec.direction)
            if choose_degree(kind, k, direction, draft.goal.interval, spec.degree + 1, self.max_degree) is None:
                return False
            plan.minimum[(kind, k)] = spec.degree + 1
        logger.debug(f"Raising {' '.join(key)} at {ctx.nstr(point, 8)}")
        return True

    def _draft(self, goal: Goal, plan: DegreePlan) -> Draft:
        draft = Draft(_Chain())

        def run(current: Goal, step: ProofStep) -> StepOutcome:
            node, outcome = _apply(current, step, self._side)
            draft.chain.push(node)
            return outcome

        current = goal
        if current.kind == "mtp":
            current = self._bound_arctan(current, plan, run, draft)
            current = run(current, ProofStep(StepKind.TO_FOURIER)).children[0]

        if current.kind == "fourier" and current.expr.keys():
            specs = self._fourier_specs(current, plan, draft)
            current = run(current, ProofStep(StepKind.APPLY_BOUNDS, bounds=specs)).children[0]
        draft.goal = current
        return draft

    def _finish(self, draft: Draft) -> ProofNode:
        def run(current: Goal, step: ProofStep) -> Goal:
            node, outcome = _apply(current, step, self._side)
            draft.chain.push(node)
            return outcome.children[0] if outcome.children else current

        current = draft.goal
        poly = self._poly(current)
        if not poly.is_zero:
            power, _ = factor_monomial(poly)
            if power == 0 or variable_positive(current.interval):
                current = run(current, ProofStep(StepKind.FACTOR_MONOMIAL))
                poly = self._poly(current)
            even = all(c.is_zero for c in poly.coefficients[1::2])
            if poly.degree >= 2 and even and pipoly_sign(current.interval.lo) >= 0:
                current = run(current, ProofStep(StepKind.SUBSTITUTE_SQUARE))
        run(current, ProofStep(StepKind.STURM_DECIDE))
        return draft.chain.root

    @staticmethod
    def _poly(goal: Goal) -> Poly:
        try:
            return goal_polynomial(goal)
        except StepError as error:
            raise ProofFailed(Failure.from_error(error, goal))

    def _bound_arctan(self, goal: Goal, plan: DegreePlan, run, draft: Draft) -> Goal:
        atoms = [atom for atom in goal.expr.atoms() if atom.func == "atan"]
        if not atoms:
            return goal
        if plan.secant:
            draft.secant_source = goal.expr
            goal = run(goal, ProofStep(StepKind.SECANT_BOUND)).children[0]
            atoms = [atom for atom in atoms if atom != ATAN_COS]
            if not atoms:
                return goal

        draft.arctan_source = goal.expr
        draft.arctan_atoms = tuple(atoms)
        pair = tuple(
            BoundSpec("arctan", direction, degree, atom.selector(goal.variable))
            for atom in atoms
            for direction, degree in (("lower", plan.atan_lower), ("upper", plan.atan_upper))
        )
        try:
            return run(goal, ProofStep(StepKind.APPLY_BOUNDS, bounds=pair)).children[0]
        except ProofFailed as failed:
            if failed.failure.error_code != "BOUND_ERROR":
                raise
        draft.arctan_paired = False
        single = tuple(BoundSpec("arctan", "lower", plan.atan_lower, atom.selector(goal.variable)) for atom in atoms)
        return run(goal, ProofStep(StepKind.APPLY_BOUNDS, bounds=single)).children[0]

    def _fourier_specs(self, goal: Goal, plan: DegreePlan, draft: Draft) -> Tuple[BoundSpec, ...]:
        form: FourierForm = goal.expr
        draft.fourier_form = form
        specs = []
        for kind, k in form.keys():
            try:
                sign, _ = coefficient_sign(form.component(kind, k), goal.interval)
            except BoundError as error:
                raise ProofFailed(Failure.from_error(error, goal))
            direction = Direction.LOWER if sign > 0 else Direction.UPPER
            minimum = plan.minimum.get((kind, k), 0)
            degree = choose_degree(kind, k, direction, goal.interval, minimum, self.max_degree)
            if degree is None:
                raise ProofFailed(
                    Failure(
                        message=f"no valid {direction.value} bound for {kind}({k}*{goal.variable}) "
                        f"up to degree {self.max_degree}",
                        error_code="BOUND_ERROR",
                        goal=str(goal),
                    )
                )
            spec = BoundSpec(kind, direction.value, degree, f"{kind}@{k if k != 1 else ''}{goal.variable}")
            draft.fourier_specs[(kind, k)] = spec
            specs.append(spec)
        return tuple(specs)


def auto_prove(goal: Goal, max_depth: Optional[int] = None, max_degree: Optional[int] = None) -> ProofNode:
    """Automatic proof search; raises ``ProofFailed`` with the deepest failure."""
    return AutoProver(max_depth, max_degree).prove(goal)


# ---------------------------------------------------------------------------
# Script execution
# ---------------------------------------------------------------------------

class ScriptRunner:
    """Runs a script against a goal, threading child goals through its items."""

    def __init__(self, auto: Optional[AutoProver] = None):
        self.auto = auto or AutoProver()

    def run(self, goal: Goal, script: Script) -> ProofNode:
        return self._run(goal, list(script.items), last_line=0)

    def _discharge(self, goal: Goal) -> ProofNode:
        return self.auto.prove(goal)

    def _run(self, goal: Goal, items: Sequence[ScriptItem], last_line: int) -> ProofNode:
        if not items:
            raise ProofFailed(
                Failure(
                    message="script ended with an open goal",
                    error_code="OPEN_GOAL",
                    goal=str(goal),
                    line=last_line or None,
                )
            )
        item, rest = items[0], items[1:]

        if isinstance(item, AutoDirective):
            logger.info(f"Automatic search for {goal}")
            return self._discharge(goal)

        if isinstance(item, SplitBlock):
            if rest:
                raise ProofFailed(
                    Failure(
                        message="steps after a split block",
                        error_code="SCRIPT_ERROR",
                        goal=str(goal),
                        line=item.step.line or None,
                    )
                )
            node, outcome = _apply(goal, item.step, self._discharge)
            left, right = outcome.children
            node.children.append(self._run(left, list(item.left.items), item.step.line))
            node.children.append(self._run(right, list(item.right.items), item.step.line))
            return node

        logger.info(f"Line {item.line}: {item.command}")
        node, outcome = _apply(goal, item, self._discharge)
        if outcome.verdict is not None:
            if rest:
                raise ProofFailed(
                    Failure(
                        message="steps after the goal was closed",
                        error_code="SCRIPT_ERROR",
                        goal=str(goal),
                        step=item.command,
                        line=item.line or None,
                    )
                )
            return node
        if len(outcome.children) != 1:
            raise ProofFailed(
                Failure(
                    message=f"{item.command} has {len(outcome.children)} children; use a split block",
                    error_code="SCRIPT_ERROR",
                    goal=str(goal),
                    line=item.line or None,
                )
            )
        node.children.append(self._run(outcome.children[0], rest, item.line))
        return node


def run_script(goal: Goal, script: Script) -> ProofNode:
    """Execute a script; raises ``ProofFailed`` naming the failing line, step and subgoal."""
    return ScriptRunner().run(goal, script)


def split(goal: Goal, point: Union[PiPoly, Fraction, int]) -> Tuple[Goal, Goal]:
    """Goals on (lo, point] and (point, hi) with the outer brackets kept."""
    step = ProofStep(StepKind.SPLIT, point=as_pipoly(point))
    return execute_step(goal, step).children


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------

class ProofEngine:
    """
    Orchestrates a proof attempt.

    Pipeline:
    1. Degenerate-goal check
    2. Numeric falsification pre-flight
    3. Script execution or automatic search
    4. Certificate assembly with precision statistics
    """

    def __init__(
        self,
        max_digits: Optional[int] = None,
        max_depth: Optional[int] = None,
        max_degree: Optional[int] = None,
        samples: Optional[int] = None,
    ):
        self.max_digits = max_digits or settings.max_digits
        self.max_depth = max_depth
        self.max_degree = max_degree
        self.samples = samples

    def prove(self, goal: Goal, script: Optional[Script] = None, notes: Sequence[str] = ()) -> Certificate:
        """
        Prove ``goal`` with a script, or by automatic search when no script is given.

        Args:
            goal: Goal to prove
            script: Proof script, None for automatic search
            notes: Annotations copied into the certificate

        Returns:
            Certificate with status proved, failed or disproved
        """
        notes = list(notes)
        logger.info(f"Proving {goal} ({'script' if script is not None else 'auto'})")

        with precision_cap(self.max_digits), precision_tracker() as tracker:
            try:
                if is_degenerate(goal):
                    point = rational_between(goal.interval)
                    return self._finish(
                        goal,
                        None,
                        STATUS_DISPROVED,
                        notes,
                        tracker,
                        counterexample=Counterexample(str(point), "0"),
                    )

                found = numeric_falsify(goal, self.samples)
                if found is not None:
                    logger.warning(f"Numeric counterexample for {goal} at {found.point}")
                    return self._finish(
                        goal,
                        None,
                        STATUS_DISPROVED,
                        notes,
                        tracker,
                        counterexample=Counterexample(found.point, found.value),
                    )

                auto = AutoProver(self.max_depth, self.max_degree)
                if script is None:
                    root = auto.prove(goal)
                else:
                    root = ScriptRunner(auto).run(goal, script)
            except ProofFailed as failed:
                logger.warning(f"Proof failed: {failed.failure.describe()}")
                return self._finish(goal, None, STATUS_FAILED, notes, tracker, failure=failed.failure)
            except PrecisionError as error:
                logger.warning(f"Proof undecided: {error.message}")
                return self._finish(goal, None, STATUS_FAILED, notes, tracker, failure=Failure.from_error(error, goal))

        certificate = self._finish(goal, root, STATUS_PROVED, notes, tracker)
        logger.info(
            f"Proved {goal}: {certificate.statistics.nodes} nodes, "
            f"{certificate.statistics.sturm_decisions} Sturm decisions"
        )
        return certificate

    def _finish(self, goal, root, status, notes, tracker, failure=None, counterexample=None) -> Certificate:
        return Certificate(
            goal=goal,
            root=root,
            status=status,
            notes=notes,
            statistics=Statistics.of(root, tracker.max_digits, self.max_digits),
            failure=failure,
            counterexample=counterexample,
        )
