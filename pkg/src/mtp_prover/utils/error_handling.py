"""Error handling utilities and custom exceptions.

Provides the prover's exception hierarchy, exit-code mapping and structured
logging helpers.
"""
import logging
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)

EXIT_PROVED = 0
EXIT_DISPROVED = 1
EXIT_UNDECIDED = 2
EXIT_INPUT_ERROR = 3


# Custom Exception Classes
class ProverException(Exception):
    """Base exception for all prover errors."""

    def __init__(
        self,
        message: str,
        error_code: str = "PROVER_ERROR",
        details: Optional[Dict[str, Any]] = None,
        exit_code: int = EXIT_UNDECIDED
    ):
        self.message = message
        self.error_code = error_code
        self.details = details or {}
        self.exit_code = exit_code
        super().__init__(self.message)


class InputError(ProverException):
    """Malformed user input: expressions, goals, scripts, arguments."""

    def __init__(self, message: str, details: Optional[Dict] = None):
        super().__init__(
            message=message,
            error_code="INPUT_ERROR",
            details=details,
            exit_code=EXIT_INPUT_ERROR
        )


class ExpressionSyntaxError(InputError):
    """Expression text that does not match the grammar."""

    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(
            message=f"{message} at offset {offset}",
            details={"offset": offset, "text": text}
        )
        self.offset = offset


class ScriptSyntaxError(InputError):
    """Proof script line that does not match the script grammar."""

    def __init__(self, message: str, line: int):
        super().__init__(
            message=f"line {line}: {message}",
            details={"line": line}
        )
        self.line = line


class PrecisionError(ProverException):
    """A sign could not be decided within the precision cap."""

    def __init__(self, digits: int, details: Optional[Dict] = None):
        super().__init__(
            message=f"undecided at precision {digits}",
            error_code="UNDECIDED_PRECISION",
            details={"digits": digits, **(details or {})},
            exit_code=EXIT_UNDECIDED
        )
        self.digits = digits


class StepError(ProverException):
    """A proof step whose precondition does not hold."""

    def __init__(
        self,
        message: str,
        error_code: str = "STEP_FAILED",
        details: Optional[Dict] = None
    ):
        super().__init__(
            message=message,
            error_code=error_code,
            details=details,
            exit_code=EXIT_UNDECIDED
        )


class IntervalError(StepError):
    """Empty interval or a point outside an interval."""

    def __init__(self, message: str, details: Optional[Dict] = None):
        super().__init__(message, error_code="INTERVAL_ERROR", details=details)


class BoundError(StepError):
    """Bound application rejected: direction, validity or assignment."""

    def __init__(self, message: str, details: Optional[Dict] = None):
        super().__init__(message, error_code="BOUND_ERROR", details=details)


class EndpointRootError(StepError):
    """An interval endpoint is a root of the polynomial being counted."""

    def __init__(self, endpoint: str, details: Optional[Dict] = None):
        super().__init__(
            f"endpoint {endpoint} is a root of the polynomial",
            error_code="ENDPOINT_ROOT",
            details={"endpoint": endpoint, **(details or {})}
        )
        self.endpoint = endpoint


class NotPositiveError(StepError):
    """Positivity fails; carries a witness point when one was found."""

    def __init__(
        self,
        message: str,
        witness: Optional[Any] = None,
        witness_sign: Optional[int] = None,
        details: Optional[Dict] = None
    ):
        super().__init__(
            message,
            error_code="NOT_POSITIVE",
            details={
                "witness": None if witness is None else str(witness),
                "witness_sign": witness_sign,
                **(details or {})
            }
        )
        self.witness = witness
        self.witness_sign = witness_sign


class CertificateError(ProverException):
    """Certificate document that cannot be decoded or does not verify."""

    def __init__(self, message: str, details: Optional[Dict] = None):
        super().__init__(
            message=message,
            error_code="CERTIFICATE_INVALID",
            details=details,
            exit_code=EXIT_UNDECIDED
        )


# Logging Helpers
def log_error(
    error: Exception,
    context: Optional[str] = None,
    extra: Optional[Dict] = None
):
    """
    Log error with context and structured data.

    Args:
        error: The exception to log
        context: Context description (e.g., "run_script", "check")
        extra: Additional context data
    """
    log_data = {
        "error_type": type(error).__name__,
        "error_message": str(error),
        "context": context,
        **(extra or {})
    }

    if isinstance(error, ProverException):
        log_data["error_code"] = error.error_code
        log_data["details"] = error.details

    logger.error(
        f"Error in {context}: {str(error)}",
        extra=log_data,
        exc_info=not isinstance(error, ProverException)
    )


def log_info(
    message: str,
    context: Optional[str] = None,
    extra: Optional[Dict] = None
):
    """
    Log info with structured data.

    Args:
        message: Info message
        context: Context description
        extra: Additional data
    """
    log_data = {
        "context": context,
        **(extra or {})
    }

    logger.info(message, extra=log_data)


def exit_code_for(error: Exception) -> int:
    """Map an exception to the CLI exit code."""
    if isinstance(error, ProverException):
        return error.exit_code
    return EXIT_UNDECIDED
