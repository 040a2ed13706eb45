"""High-precision numeric evaluation: falsification pre-flight, limit trends and plot samples."""

import csv
import io
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence

from mpmath.ctx_mp import MPContext

from ..config import settings
from ..core.coeff import ONE, PI, PiPoly
from ..core.mtp import ASIN_VAR, ATAN_VAR, MTPExpr
from ..core.poly import IntervalQPi
from ..core.steps import Goal
from ..utils.error_handling import InputError

logger = logging.getLogger(__name__)

LIMIT_POINT_NOTE = (
    "limit displays read x -> pi/2 from the left while x ranges over (0, 1); "
    "the limits are evaluated at x -> 1 from the left"
)


def numeric_context(dps: int) -> MPContext:
    """A private mpmath context so working precision never leaks between threads."""
    ctx = MPContext()
    ctx.dps = dps
    return ctx


@dataclass(frozen=True)
class Counterexample:
    """A sample point where the goal expression is not positive."""

    point: str
    value: str
    exact_point: Optional[Fraction] = None


def _simple_rationals(interval: IntervalQPi, max_denominator: int = 4) -> Iterator[Fraction]:
    lo = float(interval.lo.evaluate(numeric_context(20)))
    hi = float(interval.hi.evaluate(numeric_context(20)))
    for denominator in range(1, max_denominator + 1):
        for numerator in range(int(lo * denominator) - 1, int(hi * denominator) + 2):
            point = Fraction(numerator, denominator)
            if point.denominator == denominator and interval.contains(point):
                yield point


def _sample_points(ctx, interval: IntervalQPi, samples: int, seed: int):
    lo, hi = interval.lo.evaluate(ctx), interval.hi.evaluate(ctx)
    width = hi - lo
    for point in _simple_rationals(interval):
        yield ctx.mpf(point.numerator) / point.denominator, point
    if not interval.lo_open:
        yield lo, None
    if not interval.hi_open:
        yield hi, None
    for i in range(1, samples + 1):
        yield lo + width * i / (samples + 1), None
    rng = random.Random(seed)
    for _ in range(samples):
        offset = ctx.mpf(rng.randrange(1, 10**12)) / 10**12
        yield lo + width * offset, None


def numeric_falsify(goal: Goal, samples: Optional[int] = None) -> Optional[Counterexample]:
    """
    Look for a point where the goal expression is not positive.

    Evaluates at small rationals of the interval, closed endpoints, equispaced
    and seeded random points, all at ``settings.numeric_dps`` digits. This is a
    pre-flight check and never counts as proof.

    Args:
        goal: Goal to test
        samples: Equispaced and random sample count each

    Returns:
        First counterexample found, or None
    """
    samples = samples if samples is not None else settings.falsify_samples
    if samples < 1:
        raise InputError("numeric_falsify needs at least one sample")

    ctx = numeric_context(settings.numeric_dps)
    for value, exact in _sample_points(ctx, goal.interval, samples, settings.random_seed):
        try:
            result = goal.expr.evaluate(ctx, value)
        except (ZeroDivisionError, ValueError):
            continue
        failed = result <= 0 if goal.strict else result < 0
        if failed:
            point = str(exact) if exact is not None else ctx.nstr(value, 20)
            logger.info(f"Counterexample for {goal} at {point}: {ctx.nstr(result, 10)}")
            return Counterexample(point=point, value=ctx.nstr(result, 20), exact_point=exact)
    return None


# ---------------------------------------------------------------------------
# Limits at x -> 1-
# ---------------------------------------------------------------------------

@dataclass
class LimitEstimate:
    k: int
    value: str
    error: str
    extrapolated: Optional[str] = None
    extrapolated_error: Optional[str] = None


@dataclass
class LimitReport:
    """Trend of a ratio at x = 1 - 10^-k against its expected limit."""

    name: str
    expected: str
    expected_value: str
    estimates: List[LimitEstimate] = field(default_factory=list)
    note: str = LIMIT_POINT_NOTE

    @property
    def monotone(self) -> bool:
        errors = [Fraction(e.error) for e in self.estimates]
        return all(b < a for a, b in zip(errors, errors[1:]))

    def error_at(self, k: int, extrapolated: bool = False) -> Fraction:
        for estimate in self.estimates:
            if estimate.k == k:
                text = estimate.extrapolated_error if extrapolated else estimate.error
                if text is not None:
                    return Fraction(text)
        raise KeyError(k)

    def render(self) -> str:
        lines = [f"{self.name}: expected {self.expected} = {self.expected_value}"]
        for e in self.estimates:
            line = f"  k={e.k}  value={e.value}  error={e.error}"
            if e.extrapolated is not None:
                line += f"  richardson={e.extrapolated}  error={e.extrapolated_error}"
            lines.append(line)
        lines.append(f"  note: {self.note}")
        return "\n".join(lines)


@dataclass(frozen=True)
class LimitRatio:
    """numerator / denominator in x, expected to tend to expected_numerator / expected_denominator."""

    name: str
    numerator: MTPExpr
    denominator: MTPExpr
    expected_numerator: PiPoly
    expected_denominator: PiPoly = ONE

    @property
    def expected_display(self) -> str:
        if self.expected_denominator == ONE:
            return str(self.expected_numerator)
        return f"({self.expected_numerator})/({self.expected_denominator})"


def conjecture_ratios() -> List[LimitRatio]:
    """The two best-constant ratios, with limits (pi^2 + pi - 8)/pi and (5*pi - 12)/pi."""
    x = MTPExpr.var("x")
    asin_over_x = MTPExpr.atom(ASIN_VAR, "x") / x
    atan_over_x = MTPExpr.atom(ATAN_VAR, "x") / x
    denominator = x**3 * MTPExpr.atom(ATAN_VAR, "x")
    return [
        LimitRatio(
            "squared arcsin ratio",
            asin_over_x**2 + atan_over_x - 2,
            denominator,
            PiPoly.from_strings(["-8", "1", "1"]),
            PI,
        ),
        LimitRatio(
            "linear arcsin ratio",
            asin_over_x * 2 + atan_over_x - 3,
            denominator,
            PiPoly.from_strings(["-12", "5"]),
            PI,
        ),
    ]


def limit_check(ratio: LimitRatio, ks: Sequence[int] = tuple(range(3, 9))) -> LimitReport:
    """
    Evaluate a ratio at x = 1 - 10^-k and compare with its expected limit.

    Near x = 1 arcsin x = pi/2 - sqrt(2 (1 - x)) + ..., so the ratio expands in
    powers of s = 10^(-k/2). One Richardson step on consecutive k removes the
    s term.

    Args:
        ratio: Ratio and expected limit
        ks: Exponents k, increasing

    Returns:
        Report with raw and extrapolated errors
    """
    ctx = numeric_context(settings.limit_dps)
    expected = ratio.expected_numerator.evaluate(ctx) / ratio.expected_denominator.evaluate(ctx)
    report = LimitReport(ratio.name, ratio.expected_display, ctx.nstr(expected, 20))
    step = 1 / ctx.sqrt(10)

    previous = None
    for k in ks:
        x = 1 - ctx.mpf(10) ** (-k)
        try:
            value = ratio.numerator.evaluate(ctx, x) / ratio.denominator.evaluate(ctx, x)
        except (ZeroDivisionError, ValueError) as e:
            raise InputError(f"cannot evaluate {ratio.name} at x = 1 - 10^-{k}: {e}")
        estimate = LimitEstimate(k, ctx.nstr(value, 20), ctx.nstr(abs(value - expected), 15))
        if previous is not None and k == previous[0] + 1:
            extrapolated = (value - step * previous[1]) / (1 - step)
            estimate.extrapolated = ctx.nstr(extrapolated, 20)
            estimate.extrapolated_error = ctx.nstr(abs(extrapolated - expected), 15)
        report.estimates.append(estimate)
        previous = (k, value)

    logger.info(f"Limit check {ratio.name}: {len(report.estimates)} estimates")
    return report


# ---------------------------------------------------------------------------
# Plot samples
# ---------------------------------------------------------------------------

def sample_plot_data(goal: Goal, n: int) -> str:
    """
    Equispaced samples of the goal expression as comma-separated text.

    Open endpoints are excluded; closed endpoints are the first/last samples.

    Args:
        goal: Goal whose expression and interval are sampled
        n: Number of rows, at least 2

    Returns:
        CSV text with a header row
    """
    if n < 2:
        raise InputError(f"sample count must be at least 2, got {n}")

    ctx = numeric_context(settings.numeric_dps)
    lo, hi = goal.interval.lo.evaluate(ctx), goal.interval.hi.evaluate(ctx)
    before = 1 if goal.interval.lo_open else 0
    after = 1 if goal.interval.hi_open else 0
    slots = n - 1 + before + after

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([goal.variable, "value"])
    for i in range(n):
        point = lo + (hi - lo) * (i + before) / slots
        writer.writerow([ctx.nstr(point, 20), ctx.nstr(goal.expr.evaluate(ctx, point), 20)])
    return buffer.getvalue()
