"""
Expression and goal-file parser.

Grammar (whitespace insignificant)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := primary ("^" signed-integer)?
    primary := number | "pi" | "x" | "t" | func "(" expr ")" | "(" expr ")"
    goal    := expr ">" "0" "on" ("(" | "[") expr "," expr (")" | "]")

Decimal literals are exact: ``1.1`` is 11/10.
"""

import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Tuple

from parsy import ParseError, Parser, eof, generate, index, regex, seq, string

from ..core.coeff import PI, ZERO, PiPoly
from ..core.mtp import ASIN_VAR, ATAN_COS, ATAN_SIN, ATAN_VAR, COS, SIN, Atom, MTPExpr, as_polynomial
from ..core.poly import IntervalQPi
from ..core.steps import Goal
from ..utils.error_handling import ExpressionSyntaxError, InputError, IntervalError

logger = logging.getLogger(__name__)

VARIABLES = ("x", "t")
FUNCTION_NAMES = ("sin", "cos", "atan", "asin")


class _Reject(Exception):
    """Semantic rejection inside the grammar, converted to a positioned error."""

    def __init__(self, message: str, offset: int):
        super().__init__(message)
        self.message = message
        self.offset = offset


whitespace = regex(r"\s*")


def lexeme(p: Parser) -> Parser:
    return p << whitespace


def symbol(text: str) -> Parser:
    return lexeme(string(text))


number = lexeme(regex(r"\d+(\.\d+)?")).map(Fraction).desc("number")
identifier = seq(index, lexeme(regex(r"[A-Za-z_][A-Za-z_0-9]*"))).desc("identifier")
signed_integer = lexeme(regex(r"[+-]?\d+")).map(int).desc("integer exponent")


def _trig_atom(func: str, argument: MTPExpr, offset: int) -> Atom:
    poly = as_polynomial(argument)
    if poly is not None and poly.degree == 1 and poly.coefficient(0).is_zero:
        slope = poly.coefficient(1)
        if slope.is_constant and slope.constant_value.denominator == 1 and slope.constant_value >= 1:
            return Atom(func, int(slope.constant_value))
    raise _Reject(f"argument of {func} must be k*{argument.variable} with a positive integer k", offset)


def _inverse_atom(func: str, argument: MTPExpr, offset: int) -> Atom:
    variable = argument.variable
    if argument == MTPExpr.var(variable):
        return ATAN_VAR if func == "atan" else ASIN_VAR
    if func == "atan":
        if argument == MTPExpr.atom(SIN, variable):
            return ATAN_SIN
        if argument == MTPExpr.atom(COS, variable):
            return ATAN_COS
    raise _Reject(f"unsupported composition {func}({argument})", offset)


@generate
def primary():
    opened = yield symbol("(").optional()
    if opened is not None:
        body = yield expression
        yield symbol(")")
        return body

    value = yield number.optional()
    if value is not None:
        return MTPExpr.const(value)

    position, name = yield identifier
    if name == "pi":
        return MTPExpr.const(PI)
    if name in VARIABLES:
        return MTPExpr.var(name)

    call = yield symbol("(").optional()
    if call is None:
        raise _Reject(f"unknown symbol {name!r}", position)
    if name not in FUNCTION_NAMES:
        raise _Reject(f"unsupported function {name!r}", position)
    argument_offset = yield index
    argument = yield expression
    yield symbol(")")
    if not argument.depends_on_variable:
        raise _Reject(f"{name} of a constant is not supported", argument_offset)
    if name in ("sin", "cos"):
        atom = _trig_atom(name, argument, argument_offset)
    else:
        atom = _inverse_atom(name, argument, argument_offset)
    return MTPExpr.atom(atom, argument.variable)


@generate
def power():
    base = yield primary
    exponent = yield (symbol("^") >> signed_integer).optional()
    if exponent is None:
        return base
    position = yield index
    try:
        return base**exponent
    except InputError as e:
        raise _Reject(e.message, position)


@generate
def unary():
    sign = yield (symbol("-") | symbol("+")).optional()
    if sign is None:
        return (yield power)
    operand = yield unary
    return -operand if sign == "-" else operand


@generate
def term():
    result = yield unary
    while True:
        position = yield index
        op = yield (symbol("*") | symbol("/")).optional()
        if op is None:
            return result
        operand = yield unary
        try:
            result = result * operand if op == "*" else result / operand
        except InputError as e:
            raise _Reject(e.message, position)


@generate
def expression():
    result = yield term
    while True:
        op = yield (symbol("+") | symbol("-")).optional()
        if op is None:
            return result
        operand = yield term
        result = result + operand if op == "+" else result - operand


def _check_variables(text: str):
    found = [(m.start(), m.group(0)) for m in re.finditer(r"\b[xt]\b", text)]
    names = {name for _, name in found}
    if len(names) > 1:
        first = found[0][1]
        offset = next(start for start, name in found if name != first)
        raise ExpressionSyntaxError("expressions use either x or t, not both", offset, text)


def _run(parser: Parser, text: str):
    _check_variables(text)
    try:
        return (whitespace >> parser << eof).parse(text)
    except ParseError as e:
        expected = ", ".join(sorted(e.expected))
        raise ExpressionSyntaxError(f"expected {expected}", e.index, text)
    except _Reject as e:
        raise ExpressionSyntaxError(e.message, e.offset, text)


def parse_expr(text: str) -> MTPExpr:
    """
    Parse an expression in x or t.

    Args:
        text: Expression text

    Returns:
        Canonical expression

    Raises:
        ExpressionSyntaxError: text outside the grammar, with its offset
    """
    return _run(expression, text)


def constant_value(expr: MTPExpr, offset: int = 0) -> PiPoly:
    """The Q[pi] value of a variable-free expression."""
    if expr.is_zero:
        return ZERO
    monomial, coefficient = expr.terms[0]
    if len(expr.terms) != 1 or not monomial.is_one:
        raise _Reject(f"{expr} is not an element of Q[pi]", offset)
    return coefficient


# ---------------------------------------------------------------------------
# Goals
# ---------------------------------------------------------------------------

@generate
def endpoint():
    position = yield index
    value = yield expression
    return constant_value(value, position)


@generate
def goal_claim():
    expr = yield expression
    yield symbol(">")
    yield symbol("0")
    yield symbol("on")
    left = yield symbol("(") | symbol("[")
    lo = yield endpoint
    yield symbol(",")
    hi = yield endpoint
    right = yield symbol(")") | symbol("]")
    return expr, lo, hi, left == "(", right == ")"


@dataclass
class SourceGoal:
    """A goal file: raw text, the parsed goal and its notes."""

    text: str
    goal: Goal
    notes: List[str] = field(default_factory=list)


def parse_goal_line(text: str) -> Goal:
    """Parse ``<expr> > 0 on (<lo>, <hi>]``."""
    expr, lo, hi, lo_open, hi_open = _run(goal_claim, text)
    variable = expr.variable if expr.depends_on_variable else "t"
    try:
        interval = IntervalQPi(lo, hi, lo_open, hi_open)
    except IntervalError as e:
        raise InputError(f"goal interval: {e.message}")
    return Goal(expr.with_variable(variable), interval, variable)


def _split_goal_file(text: str) -> Tuple[List[str], str]:
    notes, claim = [], []
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("# note:"):
            notes.append(line[len("# note:"):].strip())
        elif line and not line.startswith("#"):
            claim.append(line)
    if not claim:
        raise InputError("goal file has no claim line")
    return notes, " ".join(claim)


def parse_goal(text: str) -> SourceGoal:
    """
    Parse a goal file.

    Lines starting with ``# note:`` are kept as notes, other ``#`` lines are
    comments, the remaining lines form the claim.

    Raises:
        ExpressionSyntaxError: malformed claim, offset relative to the claim
        InputError: no claim
    """
    notes, claim = _split_goal_file(text)
    goal = parse_goal_line(claim)
    logger.debug(f"Parsed goal {goal} with {len(notes)} notes")
    return SourceGoal(text=claim, goal=goal, notes=notes)


def parse_constant(text: str) -> PiPoly:
    """Parse a variable-free expression into Q[pi]."""
    return _run(endpoint, text)
