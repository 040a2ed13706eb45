"""
Command-line entry point.

    mtp-prover prove <goal>... [--script F | --auto] [--precision N] [--out F] [--emit-samples N]
    mtp-prover check <certificate>
    mtp-prover limits
    mtp-prover bounds [--max-degree N]

Certificate documents go to stdout (or ``--out``); diagnostics go to stderr.
"""

import argparse
import contextvars
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from .config import settings
from .core.bounds import render_bound_table
from .core.codec import dumps, verify_document
from .core.prover import STATUS_DISPROVED, STATUS_PROVED, Certificate, ProofEngine, Script
from .parsing.expressions import parse_goal
from .parsing.scripts import parse_script
from .services.numeric import conjecture_ratios, limit_check, sample_plot_data
from .utils.error_handling import (
    EXIT_DISPROVED,
    EXIT_INPUT_ERROR,
    EXIT_PROVED,
    EXIT_UNDECIDED,
    InputError,
    ProverException,
    exit_code_for,
    log_error,
    log_info,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class _ArgumentParser(argparse.ArgumentParser):
    """Argument errors are input errors (exit 3), not argparse's exit 2."""

    def error(self, message: str):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="mtp-prover", description="Prove positivity of mixed trigonometric polynomials."
    )
    parser.add_argument("--log-level", default=None, help=f"log level (default {settings.log_level})")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    prove = commands.add_parser("prove", help="prove goal files and emit certificates")
    prove.add_argument("goals", nargs="+", type=Path, help="goal files")
    mode = prove.add_mutually_exclusive_group()
    mode.add_argument("--script", type=Path, help="proof script (single goal only)")
    mode.add_argument("--auto", action="store_true", help="automatic search (default without --script)")
    prove.add_argument("--precision", type=int, help="digit cap for exact sign decisions")
    prove.add_argument("--out", type=Path, help="certificate file; a directory when several goals are given")
    prove.add_argument("--emit-samples", type=int, metavar="N", help="also write N plot samples as CSV")
    prove.add_argument("--workers", type=int, default=None, help=f"parallel goals (default {settings.workers})")

    check = commands.add_parser("check", help="replay a certificate document")
    check.add_argument("certificate", type=Path)

    commands.add_parser("limits", help="numeric limits of the best-constant ratios at x -> 1-")

    bounds = commands.add_parser("bounds", help="print the Taylor bound table")
    bounds.add_argument("--max-degree", type=int, default=settings.auto_max_bound_degree)
    return parser


def _read(path: Path, what: str) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {what} {path}: {e.strerror or e}", details={"path": str(path)})


# ---------------------------------------------------------------------------
# prove
# ---------------------------------------------------------------------------

@dataclass
class GoalRun:
    """Result of one goal file; output is buffered until every goal is done."""

    path: Path
    exit_code: int
    document: Optional[str] = None
    messages: List[str] = field(default_factory=list)
    samples: Optional[str] = None


def _exit_code_of(certificate: Certificate) -> int:
    if certificate.status == STATUS_PROVED:
        return EXIT_PROVED
    if certificate.status == STATUS_DISPROVED:
        return EXIT_DISPROVED
    return EXIT_UNDECIDED


def prove_file(
    path: Path,
    script: Optional[Script] = None,
    precision: Optional[int] = None,
    samples: Optional[int] = None,
) -> GoalRun:
    """
    Prove one goal file.

    Args:
        path: Goal file
        script: Parsed proof script, None for automatic search
        precision: Digit cap overriding ``settings.max_digits``
        samples: Number of plot samples to produce, None for none

    Returns:
        GoalRun with the exit code, the certificate document and stderr messages
    """
    try:
        source = parse_goal(_read(path, "goal file"))
        certificate = ProofEngine(max_digits=precision).prove(source.goal, script, source.notes)
        run = GoalRun(path, _exit_code_of(certificate), document=dumps(certificate))
        if samples is not None:
            run.samples = sample_plot_data(source.goal, samples)
    except ProverException as e:
        log_error(e, "prove", {"goal_file": str(path)})
        return GoalRun(path, exit_code_for(e), messages=[f"{path}: {e.message}"])

    if certificate.failure is not None:
        run.messages.append(f"{path}: failed: {certificate.failure.describe()}")
    elif certificate.counterexample is not None:
        ce = certificate.counterexample
        run.messages.append(f"{path}: disproved at {ce.point} (value {ce.value})")
    else:
        run.messages.append(f"{path}: proved ({certificate.statistics.nodes} nodes)")
    return run


def _run_all(goals: Sequence[Path], script, precision, samples, workers: int) -> List[GoalRun]:
    if len(goals) == 1:
        return [prove_file(goals[0], script, precision, samples)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(contextvars.copy_context().run, prove_file, path, script, precision, samples)
            for path in goals
        ]
        return [future.result() for future in futures]


def _certificate_target(out: Optional[Path], goal: Path, several: bool) -> Optional[Path]:
    if out is None:
        return None
    if several:
        return out / f"{goal.stem}.cert.json"
    return out


def _samples_target(out: Optional[Path], goal: Path, several: bool) -> Path:
    if out is None:
        directory = Path.cwd()
    else:
        directory = out if several else out.parent
    return directory / f"{goal.stem}.samples.csv"


def command_prove(args) -> int:
    if args.script is not None and len(args.goals) != 1:
        raise InputError("--script takes exactly one goal file")
    if args.precision is not None and args.precision < 1:
        raise InputError(f"--precision must be positive, got {args.precision}")
    if args.emit_samples is not None and args.emit_samples < 2:
        raise InputError(f"--emit-samples needs at least 2 samples, got {args.emit_samples}")

    script = None
    if args.script is not None:
        script = parse_script(_read(args.script, "script"))

    several = len(args.goals) > 1
    if several and args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)

    workers = args.workers or settings.workers
    log_info(f"Proving {len(args.goals)} goal file(s)", "prove", {"workers": workers})
    runs = _run_all(args.goals, script, args.precision, args.emit_samples, workers)

    for run in runs:
        for message in run.messages:
            print(message, file=sys.stderr)
        if run.document is not None:
            target = _certificate_target(args.out, run.path, several)
            if target is None:
                sys.stdout.write(run.document + "\n")
            else:
                target.write_text(run.document + "\n", encoding="utf-8")
        if run.samples is not None:
            _samples_target(args.out, run.path, several).write_text(run.samples, encoding="utf-8")
    return max(run.exit_code for run in runs)


# ---------------------------------------------------------------------------
# check, limits, bounds
# ---------------------------------------------------------------------------

def command_check(args) -> int:
    result = verify_document(_read(args.certificate, "certificate"))
    if result.accepted:
        print(f"{args.certificate}: accepted")
        return EXIT_PROVED
    print(f"{args.certificate}: rejected")
    for reason in result.reasons:
        print(f"  {reason}")
    return EXIT_UNDECIDED


def command_limits(args) -> int:
    for ratio in conjecture_ratios():
        print(limit_check(ratio).render())
    return EXIT_PROVED


def command_bounds(args) -> int:
    if args.max_degree < 0:
        raise InputError(f"--max-degree must be non-negative, got {args.max_degree}")
    print(render_bound_table(args.max_degree))
    return EXIT_PROVED


COMMANDS = {
    "prove": command_prove,
    "check": command_check,
    "limits": command_limits,
    "bounds": command_bounds,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the CLI.

    Returns:
        0 proved or accepted, 1 disproved, 2 undecided, failed or rejected, 3 input error
    """
    try:
        args = build_parser().parse_args(argv)
        level = (args.log_level or settings.log_level).upper()
        logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)
        return COMMANDS[args.command](args)
    except ProverException as e:
        log_error(e, "cli")
        print(f"error: {e.message}", file=sys.stderr)
        return exit_code_for(e)
    except ValueError as e:
        # unknown --log-level names
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
