"""Tests for proof steps, script execution, automatic search and the engine."""
from fractions import Fraction

import pytest

from mtp_prover.config import settings
from mtp_prover.core.bounds import BoundSpec, Direction
from mtp_prover.core.coeff import HALF_PI, PiPoly
from mtp_prover.core.poly import IntervalQPi
from mtp_prover.core.prover import (
    STATUS_DISPROVED,
    STATUS_FAILED,
    STATUS_PROVED,
    AutoProver,
    ProofEngine,
    ProofFailed,
    Script,
    auto_prove,
    bisection_point,
    choose_degree,
    run_script,
    split,
)
from mtp_prover.core.steps import ProofStep, StepKind, execute_step, is_degenerate
from mtp_prover.core.verifier import verify_certificate
from mtp_prover.parsing.expressions import parse_goal, parse_goal_line
from mtp_prover.parsing.scripts import parse_script
from mtp_prover.utils.error_handling import NotPositiveError, StepError


def angle(n):
    return "t" if n == 1 else f"{n}*t"


def failure_of(goal, text):
    with pytest.raises(ProofFailed) as exc_info:
        run_script(goal, parse_script(text))
    return exc_info.value.failure


class TestExecuteStep:
    """Test cases for single steps."""

    def test_substitute_sin(self):
        """Test x = sin t maps (0, 1) onto (0, pi/2)."""
        goal = parse_goal_line("atan(x)/x > 0 on (0, 1)")
        outcome = execute_step(goal, ProofStep(StepKind.SUBSTITUTE_SIN))
        (child,) = outcome.children
        assert child.variable == "t"
        assert child.interval == IntervalQPi(0, HALF_PI, True, True)
        assert outcome.evidence[0] == "x = sin(t) maps (0, 1) onto (0, 1/2*pi)"

    def test_substitute_sin_needs_x(self):
        """Test the substitution refuses a goal in t."""
        goal = parse_goal_line("sin(t) > 0 on (0, 1)")
        with pytest.raises(StepError):
            execute_step(goal, ProofStep(StepKind.SUBSTITUTE_SIN))

    def test_split_children(self):
        """Test split keeps the expression and the outer brackets."""
        goal = parse_goal_line("t + 1 > 0 on [0, pi/2)")
        left, right = split(goal, Fraction(1, 2))
        assert str(left.interval) == "[0, 1/2]"
        assert str(right.interval) == "(1/2, 1/2*pi)"
        assert left.expr == right.expr == goal.expr

    def test_to_fourier_identically_zero(self):
        """Test a strict goal whose Fourier form vanishes is not positive."""
        goal = parse_goal_line("sin(t)^2 + cos(t)^2 - 1 > 0 on (0, pi/2)")
        assert is_degenerate(goal)
        with pytest.raises(NotPositiveError):
            execute_step(goal, ProofStep(StepKind.TO_FOURIER))

    def test_sturm_evidence(self):
        """Test the Sturm step closes a polynomial goal with its certificate."""
        goal = parse_goal_line("t^2 - t + 1 > 0 on (0, 1]")
        outcome = execute_step(goal, ProofStep(StepKind.STURM_DECIDE))
        assert not outcome.children
        assert outcome.verdict.kind == "positive"
        assert outcome.evidence[0] == "roots in (0, 1]: 0"
        assert outcome.evidence[-1] == "sign at closed endpoint 1: +1"

    def test_pattern_positive_refuses_sums(self):
        """Test pattern-positive needs a single positive term."""
        goal = parse_goal_line("t - 1 > 0 on (0, 2)")
        with pytest.raises(StepError):
            execute_step(goal, ProofStep(StepKind.PATTERN_POSITIVE))

    def test_step_command(self):
        """Test the command text of grouped bounds."""
        step = ProofStep(
            StepKind.APPLY_BOUNDS,
            bounds=(
                BoundSpec("arctan", "lower", 3, "atan@sin"),
                BoundSpec("arctan", "upper", 5, "atan@sin"),
            ),
        )
        assert step.command == "bound arctan lower 3 @ atan@sin; bound arctan upper 5 @ atan@sin"
        assert ProofStep(StepKind.SPLIT, point=HALF_PI).command == "split 1/2*pi"


class TestScriptRunner:
    """Test cases for script execution errors."""

    def test_open_goal(self):
        """Test a script that stops early leaves an open goal."""
        goal = parse_goal_line("sin(t) + 1 > 0 on (0, pi/2)")
        failure = failure_of(goal, "to-fourier\n")
        assert failure.error_code == "OPEN_GOAL"
        assert failure.line == 1

    def test_steps_after_close(self):
        """Test steps after a closing step are a script error."""
        goal = parse_goal_line("t + 1 > 0 on (0, 1)")
        failure = failure_of(goal, "sturm\nsturm\n")
        assert failure.error_code == "SCRIPT_ERROR"
        assert failure.message == "steps after the goal was closed"
        assert failure.line == 1

    def test_steps_after_split_block(self):
        """Test a split block must end its branch."""
        goal = parse_goal_line("t + 1 > 0 on (0, 1)")
        failure = failure_of(goal, "split 1/2\ncase left\nsturm\ncase right\nsturm\nend\nsturm\n")
        assert failure.error_code == "SCRIPT_ERROR"
        assert failure.message == "steps after a split block"

    def test_split_outside_block(self):
        """Test a bare split step reports its two children."""
        goal = parse_goal_line("t + 1 > 0 on (0, 1)")
        script = Script((ProofStep(StepKind.SPLIT, point=PiPoly.const(Fraction(1, 2)), line=4),))
        with pytest.raises(ProofFailed) as exc_info:
            run_script(goal, script)
        assert "has 2 children" in exc_info.value.failure.message
        assert exc_info.value.failure.line == 4

    def test_failure_names_line_and_step(self):
        """Test a failing step is located by line and command."""
        goal = parse_goal_line("t + 1 > 0 on (0, 1)")
        script = "# split outside the interval\nsplit 3\ncase left\nsturm\ncase right\nsturm\nend\n"
        failure = failure_of(goal, script)
        assert failure.error_code == "INTERVAL_ERROR"
        assert failure.describe().startswith("line 2: split 3: ")
        assert failure.describe().endswith(f"[goal {goal}]")

    def test_split_block_closes_both_cases(self):
        """Test both cases of a split are proved."""
        goal = parse_goal_line("t^2 - t + 1 > 0 on (0, 2)")
        root = run_script(goal, parse_script("split 1\ncase left\nsturm\ncase right\nsturm\nend\n"))
        assert root.closed
        assert [child.goal.interval for child in root.children] == [
            IntervalQPi(0, 1, True, False),
            IntervalQPi(1, 2, True, True),
        ]

    def test_side_condition_proved_by_search(self):
        """Test a sum multiplier gets a proof of its positivity."""
        goal = parse_goal_line("t + 1 > 0 on (0, 1)")
        root = run_script(goal, parse_script("mul-positive 2 - t\nsturm\n"))
        assert root.closed
        (condition,) = root.side_conditions
        assert not condition.condition.discharged
        assert condition.proof is not None and condition.proof.closed

    def test_auto_directive(self):
        """Test auto finishes the branch it appears in."""
        goal = parse_goal_line("sin(t) - t/2 > 0 on (0, 1)")
        root = run_script(goal, parse_script("auto\n"))
        assert root.closed


class TestAutoProver:
    """Test cases for the automatic search."""

    def test_pattern_goal(self):
        """Test a single positive term closes by pattern."""
        root = auto_prove(parse_goal_line("pi*sin(t)^3 > 0 on (0, pi/2)"))
        assert root.step.kind == StepKind.PATTERN_POSITIVE
        assert root.verdict.pattern == "positive-monomial"

    def test_sine_bound_chosen(self):
        """Test the search picks the cubic lower bound for sin t on (0, 1)."""
        root = auto_prove(parse_goal_line("sin(t) - t/2 > 0 on (0, 1)"))
        bound_steps = [node.step for node in root.walk() if node.step.kind == StepKind.APPLY_BOUNDS]
        assert bound_steps[0].bounds == (BoundSpec("sin", "lower", 3, "sin@t"),)
        assert sum(1 for node in root.walk() if node.verdict is not None) == 1

    def test_search_exhausted(self):
        """Test a false polynomial goal fails with its deepest failure."""
        with pytest.raises(ProofFailed) as exc_info:
            auto_prove(parse_goal_line("1/2 - t > 0 on (0, 1)"), max_depth=0)
        assert exc_info.value.failure.error_code == "NOT_POSITIVE"

    def test_bisection_point(self, half_pi_interval):
        """Test the bisection point lies in the middle half."""
        point = bisection_point(half_pi_interval)
        assert Fraction(39, 100) < point < Fraction(118, 100)

    def test_choose_degree(self):
        """Test the smallest valid degree on (0, 11/10] for cos(8t)."""
        interval = IntervalQPi(0, Fraction(11, 10))
        assert choose_degree("cos", 8, Direction.UPPER, interval, 0, 23) == 8
        assert choose_degree("cos", 8, Direction.UPPER, interval, 0, 4) is None
        assert choose_degree("cos", 2, Direction.LOWER, interval, 0, 23) == 2

    def test_substitution_before_any_split(self):
        """Test a goal in x is substituted and cleared once, at the root."""
        root = auto_prove(parse_goal_line("asin(x)/x - 1 > 0 on (0, 1)"))
        assert root.closed
        assert root.step.kind == StepKind.SUBSTITUTE_SIN
        assert root.children[0].step.kind == StepKind.MUL_POSITIVE
        below = list(root.children[0].children[0].walk())
        assert all(node.goal.variable != "x" for node in below)
        assert all(node.step.kind != StepKind.SUBSTITUTE_SIN for node in below)

    def test_degree_raised_for_one_atom(self):
        """Test sin(t) < t is too weak and the next upper bound is taken without splitting."""
        root = auto_prove(parse_goal_line("t - sin(t) - t^3/7 > 0 on (0, 1)"))
        bound_steps = [node.step for node in root.walk() if node.step.kind == StepKind.APPLY_BOUNDS]
        assert bound_steps[0].bounds == (BoundSpec("sin", "upper", 5, "sin@t"),)
        assert all(node.step.kind != StepKind.SPLIT for node in root.walk())

    def test_failed_subgoal_remembered(self):
        """Test an exhausted goal is cached with its failure."""
        goal = parse_goal_line("1/2 - t > 0 on (0, 1)")
        prover = AutoProver(max_depth=0)
        with pytest.raises(ProofFailed):
            prover.prove(goal)
        assert prover.failed[str(goal)].error_code == "NOT_POSITIVE"
        with pytest.raises(ProofFailed) as exc_info:
            prover._search(goal, 0)
        assert exc_info.value.failure is prover.failed[str(goal)]

    def test_attempt_budget(self, monkeypatch):
        """Test the search stops once the draft budget is spent."""
        monkeypatch.setattr(settings, "auto_max_attempts", 1)
        with pytest.raises(ProofFailed) as exc_info:
            auto_prove(parse_goal_line("t - sin(t) - t^3/7 > 0 on (0, 1)"))
        assert exc_info.value.failure.error_code == "SEARCH_BUDGET"

    def test_squared_arcsin_left_case(self):
        """Test the first-case goal on (0, 11/10] is proved without a script and replays."""
        goal = parse_goal_line(
            "2*pi*sin(t)^2 + (pi^2+pi-8)*sin(t)^5*atan(sin(t)) - pi*sin(t)*atan(sin(t)) - pi*t^2 > 0 on (0, 1.1]"
        )
        certificate = ProofEngine().prove(goal)
        assert certificate.proved, certificate.failure
        assert verify_certificate(certificate).accepted

    def test_companion_theorem(self, proofs_dir):
        """Test the 7/20 companion inequality is proved in x without a script and replays."""
        source = parse_goal((proofs_dir / "theorem_chen.goal").read_text(encoding="utf-8"))
        certificate = ProofEngine().prove(source.goal)
        assert certificate.proved, certificate.failure
        assert certificate.root.step.kind == StepKind.SUBSTITUTE_SIN
        splits = [node for node in certificate.root.walk() if node.step.kind == StepKind.SPLIT]
        assert all(node.goal.variable == "t" for node in splits)
        result = verify_certificate(certificate)
        assert result.accepted, result.reasons

    def test_random_goals_never_rejected(self, rng, monkeypatch):
        """Test every certificate the search returns on random small goals replays."""
        monkeypatch.setattr(settings, "auto_max_attempts", 40)
        engine = ProofEngine(max_depth=2, max_degree=15, samples=40)
        for _ in range(12):
            a, b, c = (int(v) for v in rng.integers(-2, 3, size=3))
            k, m = (int(v) for v in rng.integers(1, 4, size=2))
            j = int(rng.integers(1, 3))
            d = int(rng.integers(1, 6))
            hi = ["1/2", "1", "3/2"][int(rng.integers(0, 3))]
            terms = [(a, f"sin({angle(k)})"), (b, f"cos({angle(m)})"), (c, f"t^{j}")]
            text = f"{d} " + " ".join(f"{'-' if v < 0 else '+'} {abs(v)}*{atom}" for v, atom in terms)
            certificate = engine.prove(parse_goal_line(f"{text} > 0 on (0, {hi}]"))
            assert certificate.status in (STATUS_PROVED, STATUS_FAILED, STATUS_DISPROVED)
            if certificate.proved:
                result = verify_certificate(certificate)
                assert result.accepted, (text, result.reasons)


class TestProofEngine:
    """Test cases for ProofEngine.prove."""

    def test_proved_with_statistics(self):
        """Test a proved certificate counts its nodes and Sturm decisions."""
        certificate = ProofEngine().prove(parse_goal_line("sin(t) - t/2 > 0 on (0, 1)"))
        assert certificate.status == STATUS_PROVED
        assert certificate.proved
        assert certificate.statistics.sturm_decisions == 1
        assert certificate.statistics.nodes == len(list(certificate.root.walk()))

    def test_degenerate_goal_disproved(self):
        """Test an identically zero goal is disproved with value 0."""
        certificate = ProofEngine().prove(parse_goal_line("sin(t)^2 + cos(t)^2 - 1 > 0 on (0, pi/2)"))
        assert certificate.status == STATUS_DISPROVED
        assert certificate.counterexample.value == "0"
        assert certificate.root is None

    def test_numeric_counterexample(self):
        """Test the pre-flight finds the exact point t = 1."""
        certificate = ProofEngine().prove(parse_goal_line("t - 1 > 0 on (0, 2)"))
        assert certificate.status == STATUS_DISPROVED
        assert certificate.counterexample.point == "1"

    def test_script_failure(self):
        """Test a failing script gives a failed certificate with its record."""
        goal = parse_goal_line("t + 1 > 0 on (0, 1)")
        certificate = ProofEngine().prove(goal, parse_script("to-fourier\n"), notes=["kept"])
        assert certificate.status == STATUS_FAILED
        assert certificate.failure.error_code == "OPEN_GOAL"
        assert certificate.notes == ["kept"]

    def test_script_proof(self):
        """Test a script proof through a reflection."""
        goal = parse_goal_line("cos(t) > 0 on (0, pi/2)")
        certificate = ProofEngine().prove(goal, parse_script("reflect\npattern-positive\n"))
        assert certificate.proved
        assert certificate.root.children[0].goal.display_expr == "sin(t)"
