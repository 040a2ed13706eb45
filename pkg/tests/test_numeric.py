"""Tests for numeric falsification, limit trends and plot samples."""
import csv
import io
from fractions import Fraction

import pytest

from mtp_prover.parsing.expressions import parse_goal_line
from mtp_prover.services.numeric import (
    LIMIT_POINT_NOTE,
    conjecture_ratios,
    limit_check,
    numeric_context,
    numeric_falsify,
    sample_plot_data,
)
from mtp_prover.utils.error_handling import InputError


@pytest.fixture(scope="module")
def limit_reports():
    return {ratio.name: limit_check(ratio) for ratio in conjecture_ratios()}


class TestNumericFalsify:
    """Test cases for the falsification pre-flight."""

    def test_true_goal(self):
        """Test no counterexample for a true inequality."""
        assert numeric_falsify(parse_goal_line("sin(t) - t/2 > 0 on (0, 1)")) is None

    def test_exact_rational_found(self):
        """Test small rationals are tried first and reported exactly."""
        found = numeric_falsify(parse_goal_line("t - 1 > 0 on (0, 2)"))
        assert found.point == "1"
        assert found.exact_point == Fraction(1)

    def test_interior_dip(self):
        """Test a negative dip between simple rationals is found by sampling."""
        goal = parse_goal_line("(t - 7/10)^2 - 1/10000 > 0 on (0, 1)")
        found = numeric_falsify(goal)
        assert found is not None
        point = Fraction(found.point)
        assert Fraction(69, 100) < point < Fraction(71, 100)

    def test_non_strict_zero_allowed(self):
        """Test a zero is a counterexample only for strict goals."""
        goal = parse_goal_line("(t - 1)^2 > 0 on (0, 2)")
        assert numeric_falsify(goal) is not None
        assert numeric_falsify(goal.derive(goal.expr, strict=False)) is None

    def test_sample_count(self):
        """Test zero samples is an input error."""
        with pytest.raises(InputError):
            numeric_falsify(parse_goal_line("t > 0 on (0, 1)"), samples=0)


class TestLimits:
    """Test cases for the best-constant limits at x -> 1 from the left."""

    @pytest.mark.parametrize("name", ["squared arcsin ratio", "linear arcsin ratio"])
    def test_extrapolated_limit(self, limit_reports, name):
        """Test the extrapolated ratio is within 1e-3 of the constant from k = 6 on."""
        report = limit_reports[name]
        for k in (6, 7, 8):
            assert report.error_at(k, extrapolated=True) < Fraction(1, 1000)

    @pytest.mark.parametrize("name", ["squared arcsin ratio", "linear arcsin ratio"])
    def test_raw_errors_decrease(self, limit_reports, name):
        """Test the raw error shrinks monotonically and is below 1e-3 at k = 8."""
        report = limit_reports[name]
        assert report.monotone
        assert report.error_at(8) < Fraction(1, 1000)

    def test_expected_values(self, limit_reports):
        """Test the expected constants (pi^2 + pi - 8)/pi and (5*pi - 12)/pi."""
        squared = limit_reports["squared arcsin ratio"]
        linear = limit_reports["linear arcsin ratio"]
        assert squared.expected == "(pi^2 + pi - 8)/(pi)"
        assert squared.expected_value.startswith("1.5951")
        assert linear.expected_value.startswith("1.1802")

    def test_render_carries_note(self, limit_reports):
        """Test the rendered report ends with the limit-point note."""
        text = limit_reports["linear arcsin ratio"].render()
        assert text.splitlines()[0].startswith("linear arcsin ratio: expected")
        assert text.endswith(f"note: {LIMIT_POINT_NOTE}")

    def test_missing_k(self, limit_reports):
        """Test asking for an unevaluated k raises KeyError."""
        with pytest.raises(KeyError):
            limit_reports["squared arcsin ratio"].error_at(20)


class TestPlotSamples:
    """Test cases for sampled plot data."""

    def test_open_interval_excludes_endpoints(self):
        """Test open ends are not sampled."""
        text = sample_plot_data(parse_goal_line("t > 0 on (0, 1)"), 4)
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == ["t", "value"]
        points = [Fraction(row[0]) for row in rows[1:]]
        assert points == [Fraction(1, 5), Fraction(2, 5), Fraction(3, 5), Fraction(4, 5)]

    def test_closed_interval_includes_endpoints(self):
        """Test closed ends are the first and last samples."""
        text = sample_plot_data(parse_goal_line("x^2 + 1 > 0 on [0, 1]"), 3)
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == ["x", "value"]
        assert [row[1] for row in rows[1:]] == ["1.0", "1.25", "2.0"]

    def test_too_few_samples(self):
        """Test fewer than two rows is an input error."""
        with pytest.raises(InputError):
            sample_plot_data(parse_goal_line("t > 0 on (0, 1)"), 1)


class TestNumericContext:
    """Test cases for private mpmath contexts."""

    def test_contexts_are_independent(self):
        """Test each context keeps its own precision."""
        coarse = numeric_context(15)
        fine = numeric_context(50)
        assert coarse.dps == 15
        assert fine.dps == 50
        rough = fine.mpf(coarse.mpf(coarse.pi))
        assert abs(fine.mpf(fine.pi) - rough) > fine.mpf(10) ** -20
