"""Exception hierarchy shared by every qclab service."""

from typing import Optional


class QCLabError(Exception):
    """Base class for all qclab errors"""


class InvalidArgumentError(QCLabError, ValueError):
    """An argument is outside its documented domain"""


class SpaceTooLargeError(InvalidArgumentError):
    """Requested Fock space exceeds the configured dimension limit"""


class StateError(InvalidArgumentError):
    """A state specification cannot be realised on the given space"""


class NormalOrderingError(InvalidArgumentError):
    """A slot pattern places an annihilation slot before a creation slot"""


class PreconditionError(QCLabError):
    """An operation's precondition on its input field does not hold"""


class IdentityEvaluationError(QCLabError):
    """A module error raised while evaluating a named check"""

    def __init__(self, identity: str, cause: Exception):
        super().__init__(f"[{identity}] {type(cause).__name__}: {cause}")
        self.identity = identity
        self.cause = cause


class ScenarioError(QCLabError):
    """Scenario file cannot be read, parsed or validated"""

    def __init__(self, message: str, field_path: Optional[str] = None):
        super().__init__(f"{field_path}: {message}" if field_path else message)
        self.field_path = field_path


class ReportIOError(QCLabError):
    """Report could not be written"""
