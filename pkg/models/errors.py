"""Exception hierarchy; every error carries the category that picks its CLI exit code."""

from .schemas import ErrorCategory


EXIT_CODES = {
    ErrorCategory.INVALID_PARAMETERS: 2,
    ErrorCategory.UNKNOWN_PRESET: 3,
    ErrorCategory.SHAPE_MISMATCH: 4,
    ErrorCategory.ARITHMETIC: 5,
    ErrorCategory.ATTACK_PRECONDITION: 6,
    ErrorCategory.INFEASIBLE_ATTACK: 7,
    ErrorCategory.ATTACK_UNDECIDED: 8,
    ErrorCategory.SESSION: 9,
    ErrorCategory.IO_ERROR: 10,
    ErrorCategory.SYSTEM_ERROR: 70,
}


class CBPIRError(Exception):
    """Base class for laboratory errors."""
    category: ErrorCategory = ErrorCategory.SYSTEM_ERROR

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.category]


class InvalidParametersError(CBPIRError, ValueError):
    category = ErrorCategory.INVALID_PARAMETERS


class UnknownPresetError(CBPIRError, LookupError):
    category = ErrorCategory.UNKNOWN_PRESET


class ShapeMismatchError(CBPIRError, ValueError):
    category = ErrorCategory.SHAPE_MISMATCH


class FieldArithmeticError(CBPIRError, ZeroDivisionError):
    category = ErrorCategory.ARITHMETIC


class SingularMatrixError(CBPIRError, ArithmeticError):
    """A sampled matrix was singular; callers resample."""
    category = ErrorCategory.ARITHMETIC


class DatabaseTooSmallError(CBPIRError):
    category = ErrorCategory.ATTACK_PRECONDITION


class InfeasibleAttackError(CBPIRError):
    category = ErrorCategory.INFEASIBLE_ATTACK


class InconsistentBatchError(CBPIRError):
    """A batch flagged as containing alpha contradicts itself (upstream false positive)."""
    category = ErrorCategory.ATTACK_UNDECIDED


class SessionLimitError(CBPIRError):
    category = ErrorCategory.SESSION


class MissingBetaResponseError(CBPIRError, ValueError):
    category = ErrorCategory.SESSION


class CodecError(CBPIRError, ValueError):
    category = ErrorCategory.IO_ERROR


class ArtifactIOError(CBPIRError, OSError):
    category = ErrorCategory.IO_ERROR
