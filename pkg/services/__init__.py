"""Services module for the CB-cPIR laboratory."""

from .field_core import ExtFieldSpec, FieldSpec, GammaBasis, make_fields
from .matrix_rank import EchelonAccumulator
from .linear_code import LinearCode, sample_code
from .pir_scheme import PIRSession, query_cbcpir, query_original, server_answer
from .cryptanalysis import IndexRecoveryAttack, attack_cost, recover_index, subquery_attack
from .rate_analysis import TableEmitter

__all__ = [
    "ExtFieldSpec",
    "FieldSpec",
    "GammaBasis",
    "make_fields",
    "EchelonAccumulator",
    "LinearCode",
    "sample_code",
    "PIRSession",
    "query_cbcpir",
    "query_original",
    "server_answer",
    "IndexRecoveryAttack",
    "attack_cost",
    "recover_index",
    "subquery_attack",
    "TableEmitter",
]
