"""Models module for the CB-cPIR laboratory."""

from .schemas import (
    ArithOp,
    SubspacePart,
    SchemeKind,
    BatchOrder,
    AttackStatus,
    ErrorCategory,
    SchemeParams,
    Preset,
    RateConfig,
    AttackConfig,
    AttackCost,
    AttackReport,
    SubqueryOutcome,
    TrafficReport,
    CheckResult
)
from .errors import (
    EXIT_CODES,
    CBPIRError,
    InvalidParametersError,
    UnknownPresetError,
    ShapeMismatchError,
    FieldArithmeticError,
    SingularMatrixError,
    DatabaseTooSmallError,
    InfeasibleAttackError,
    InconsistentBatchError,
    SessionLimitError,
    MissingBetaResponseError,
    CodecError,
    ArtifactIOError
)

__all__ = [
    "ArithOp",
    "SubspacePart",
    "SchemeKind",
    "BatchOrder",
    "AttackStatus",
    "ErrorCategory",
    "SchemeParams",
    "Preset",
    "RateConfig",
    "AttackConfig",
    "AttackCost",
    "AttackReport",
    "SubqueryOutcome",
    "TrafficReport",
    "CheckResult",
    "EXIT_CODES",
    "CBPIRError",
    "InvalidParametersError",
    "UnknownPresetError",
    "ShapeMismatchError",
    "FieldArithmeticError",
    "SingularMatrixError",
    "DatabaseTooSmallError",
    "InfeasibleAttackError",
    "InconsistentBatchError",
    "SessionLimitError",
    "MissingBetaResponseError",
    "CodecError",
    "ArtifactIOError"
]
