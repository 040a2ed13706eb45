"""
Proof-script parser.

One command per line; ``#`` starts a comment. Commands::

    substitute-sin | reflect | secant-arctan-cos | to-fourier
    factor-monomial | subst-square | sturm | pattern-positive | auto
    mul-positive <expr>
    bound <sin|cos|atan|arctan> <lower|upper> <degree> @ <selector>
    split <point>
      case left
        ...
      case right
        ...
    end

Consecutive ``bound`` lines form a single bound step.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from ..core.bounds import BOUND_FUNCTIONS, BoundRule, BoundSpec, normalize_function, selector_is_wellformed
from ..core.prover import AutoDirective, Script, ScriptItem, SplitBlock
from ..core.steps import ProofStep, StepKind
from ..utils.error_handling import BoundError, ExpressionSyntaxError, ScriptSyntaxError
from .expressions import parse_constant, parse_expr

logger = logging.getLogger(__name__)

_PLAIN_COMMANDS = {
    "substitute-sin": StepKind.SUBSTITUTE_SIN,
    "reflect": StepKind.REFLECT,
    "secant-arctan-cos": StepKind.SECANT_BOUND,
    "to-fourier": StepKind.TO_FOURIER,
    "factor-monomial": StepKind.FACTOR_MONOMIAL,
    "subst-square": StepKind.SUBSTITUTE_SQUARE,
    "sturm": StepKind.STURM_DECIDE,
    "pattern-positive": StepKind.PATTERN_POSITIVE,
}


@dataclass(frozen=True)
class _Line:
    number: int
    text: str

    @property
    def command(self) -> str:
        return self.text.split(None, 1)[0]

    @property
    def argument(self) -> str:
        parts = self.text.split(None, 1)
        return parts[1].strip() if len(parts) > 1 else ""


def _significant_lines(text: str) -> List[_Line]:
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if content:
            lines.append(_Line(number, " ".join(content.split())))
    return lines


def parse_bound(line: _Line) -> BoundSpec:
    """``bound <fn> <lower|upper> <degree> @ <selector>``."""
    words = line.argument.replace("@", " @ ", 1).split()
    if len(words) >= 2 and words[1] not in ("lower", "upper"):
        raise ScriptSyntaxError(f"direction keyword is lower or upper, got {words[1]!r}", line.number)
    if len(words) != 5 or words[3] != "@":
        raise ScriptSyntaxError("expected 'bound <fn> <lower|upper> <degree> @ <selector>'", line.number)
    function, direction, degree_text, _, selector = words
    if function not in BOUND_FUNCTIONS and function != "atan":
        raise ScriptSyntaxError(f"no bounds for function {function!r}", line.number)
    if not degree_text.isdigit():
        raise ScriptSyntaxError(f"degree must be a non-negative integer, got {degree_text!r}", line.number)
    if not selector_is_wellformed(selector):
        raise ScriptSyntaxError(f"malformed selector {selector!r}", line.number)
    function = normalize_function(function)
    try:
        BoundRule(function, int(degree_text), direction)
    except BoundError as e:
        raise ScriptSyntaxError(e.message, line.number)
    return BoundSpec(function, direction, int(degree_text), selector)


def _parse_point(line: _Line):
    try:
        return parse_constant(line.argument)
    except ExpressionSyntaxError as e:
        raise ScriptSyntaxError(f"split point: {e.message}", line.number)


class _ScriptParser:
    def __init__(self, lines: Sequence[_Line]):
        self.lines = lines
        self.pos = 0

    def _peek(self) -> Optional[_Line]:
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def _expect(self, text: str, after: _Line) -> _Line:
        line = self._peek()
        if line is None or line.text != text:
            where = after.number if line is None else line.number
            raise ScriptSyntaxError(f"expected '{text}'", where)
        self.pos += 1
        return line

    def block(self, terminators: Tuple[str, ...]) -> Script:
        items: List[ScriptItem] = []
        pending: List[Tuple[_Line, BoundSpec]] = []

        def flush():
            if pending:
                items.append(
                    ProofStep(
                        StepKind.APPLY_BOUNDS,
                        bounds=tuple(spec for _, spec in pending),
                        label="; ".join(line.text for line, _ in pending),
                        line=pending[0][0].number,
                    )
                )
                pending.clear()

        while True:
            line = self._peek()
            if line is None or line.text in terminators:
                flush()
                return Script(tuple(items))
            self.pos += 1

            command = line.command
            if command == "bound":
                pending.append((line, parse_bound(line)))
                continue
            flush()

            if command in _PLAIN_COMMANDS:
                if line.argument:
                    raise ScriptSyntaxError(f"{command} takes no argument", line.number)
                items.append(ProofStep(_PLAIN_COMMANDS[command], label=line.text, line=line.number))
            elif command == "auto":
                items.append(AutoDirective(line=line.number))
            elif command == "mul-positive":
                items.append(self._mul_positive(line))
            elif command == "split":
                items.append(self._split(line))
            elif line.text in ("case left", "case right", "end"):
                raise ScriptSyntaxError(f"unexpected '{line.text}'", line.number)
            else:
                raise ScriptSyntaxError(f"unknown command {command!r}", line.number)

    @staticmethod
    def _mul_positive(line: _Line) -> ProofStep:
        if not line.argument:
            raise ScriptSyntaxError("mul-positive needs an expression", line.number)
        try:
            multiplier = parse_expr(line.argument)
        except ExpressionSyntaxError as e:
            raise ScriptSyntaxError(f"multiplier: {e.message}", line.number)
        return ProofStep(StepKind.MUL_POSITIVE, multiplier=multiplier, label=line.text, line=line.number)

    def _split(self, line: _Line) -> SplitBlock:
        if not line.argument:
            raise ScriptSyntaxError("split needs a point", line.number)
        step = ProofStep(StepKind.SPLIT, point=_parse_point(line), label=line.text, line=line.number)
        opener = self._expect("case left", line)
        left = self.block(("case right", "end"))
        self._expect("case right", opener)
        right = self.block(("end", "case left", "case right"))
        self._expect("end", line)
        return SplitBlock(step, left, right)


def parse_script(text: str) -> Script:
    """
    Parse a proof script.

    Raises:
        ScriptSyntaxError: unknown command, malformed argument or unbalanced block, with its line
    """
    parser = _ScriptParser(_significant_lines(text))
    script = parser.block(())
    leftover = parser._peek()
    if leftover is not None:
        raise ScriptSyntaxError(f"unexpected '{leftover.text}'", leftover.number)
    logger.debug(f"Parsed script with {len(script)} top-level items")
    return script
