"""Pydantic models for parameters, configurations and reports."""

import math
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence

import galois
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class ArithOp(str, Enum):
    """Field operation selector."""
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    INV = "inv"
    NEG = "neg"


class SubspacePart(str, Enum):
    """Half of the V (+) W decomposition of F_{q^s}."""
    V = "V"
    W = "W"


class SchemeKind(str, Enum):
    """PIR protocol variant."""
    ORIGINAL = "original"
    CBCPIR = "cbcpir"


class BatchOrder(str, Enum):
    """Enumeration order of alpha candidates over F_q^x."""
    NATURAL = "natural"
    SHUFFLED = "shuffled"


class AttackStatus(str, Enum):
    """Outcome of an index-recovery run."""
    RECOVERED = "recovered"
    UNDECIDED = "undecided"


class ErrorCategory(str, Enum):
    """Error category enumeration, one CLI exit code each."""
    INVALID_PARAMETERS = "invalid_parameters"
    UNKNOWN_PRESET = "unknown_preset"
    SHAPE_MISMATCH = "shape_mismatch"
    ARITHMETIC = "arithmetic"
    ATTACK_PRECONDITION = "attack_precondition"
    INFEASIBLE_ATTACK = "infeasible_attack"
    ATTACK_UNDECIDED = "attack_undecided"
    SESSION = "session"
    IO_ERROR = "io_error"
    SYSTEM_ERROR = "system_error"


class SchemeParams(BaseModel):
    """Scheme parameters (q = q_base^q_exp, s, v, n, k) and database shape (m, L, f)."""
    model_config = ConfigDict(frozen=True)

    q_base: int = Field(..., description="Characteristic p of F_q")
    q_exp: int = Field(default=1, ge=1, description="Exponent e with q = p^e")
    s: int = Field(..., ge=1, description="Extension degree")
    v: int = Field(..., ge=1, description="Dimension of the error space V")
    n: int = Field(..., ge=2, description="Code length")
    k: int = Field(..., ge=1, description="Code dimension")
    m: int = Field(default=1, ge=1, description="Number of files")
    L: int = Field(default=1, ge=1, description="Rows per file")
    f: int = Field(default=1, ge=1, description="Files requested per beta session")

    @field_validator("q_base")
    @classmethod
    def _check_prime(cls, value: int) -> int:
        if value < 2 or not galois.is_prime(value):
            raise ValueError(f"q_base must be prime, got {value}")
        return value

    @model_validator(mode="after")
    def _check_shape(self) -> "SchemeParams":
        if self.v >= self.s:
            raise ValueError(f"v must be smaller than s (v={self.v}, s={self.s})")
        if self.k >= self.n:
            raise ValueError(f"k must be smaller than n (k={self.k}, n={self.n})")
        return self

    @property
    def q(self) -> int:
        return self.q_base ** self.q_exp

    @property
    def delta(self) -> int:
        """Payload width per file, (s - v)(n - k)."""
        return (self.s - self.v) * (self.n - self.k)

    @property
    def log2_q(self) -> float:
        return self.q_exp * math.log2(self.q_base)

    @property
    def fq_width(self) -> int:
        """Width ns of a query row expanded over F_q."""
        return self.n * self.s

    def with_updates(self, **changes) -> "SchemeParams":
        """Return a validated copy with some fields replaced."""
        return SchemeParams(**{**self.model_dump(), **changes})


class Preset(BaseModel):
    """Named parameter set with its provenance."""
    name: str = Field(..., description="Preset name")
    params: SchemeParams = Field(..., description="Scheme parameters")
    provenance: str = Field(default="", description="Where the parameters come from")
    stored_delta: Optional[int] = Field(None, description="Delta as listed by the source, cross-checked")
    security_bits: Optional[int] = Field(None, description="Claimed security level against prior attacks")
    reported_attack_exponent: Optional[int] = Field(None, description="Published log2 attack complexity")

    @model_validator(mode="after")
    def _check_delta(self) -> "Preset":
        if self.stored_delta is not None and self.stored_delta != self.params.delta:
            raise ValueError(
                f"preset {self.name}: stored delta {self.stored_delta} != (s-v)(n-k) = {self.params.delta}"
            )
        return self


class RateConfig(BaseModel):
    """Constants of the schemes compared against CB-cPIR."""
    params: SchemeParams = Field(..., description="CB-cPIR parameters")
    xpir_ciphertext_bits: int = Field(default=128_000, gt=0, description="XPIR ciphertext size s_c")
    xpir_plaintext_bits: int = Field(default=20_000, gt=0, description="XPIR plaintext size s_p")
    simplepir_q: int = Field(default=2**32, gt=1, description="SimplePIR LWE modulus")
    simplepir_p: int = Field(default=495, gt=1, description="SimplePIR plaintext modulus")
    simplepir_n: int = Field(default=1024, gt=0, description="SimplePIR LWE dimension")
    amortization: float = Field(default=1.0, description="Hint amortization t (inf allowed)")
    file_size_bits: Optional[float] = Field(None, description="File size F in bits for a single-point evaluation")

    @field_validator("amortization")
    @classmethod
    def _check_amortization(cls, value: float) -> float:
        if not value >= 1:
            raise ValueError(f"amortization t must be >= 1 or inf, got {value}")
        return value

    @field_validator("file_size_bits")
    @classmethod
    def _check_file_size(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not value > 0:
            raise ValueError("file size must be positive")
        return value


class AttackConfig(BaseModel):
    """Knobs of the index-recovery attack."""
    rows_per_block: Optional[int] = Field(None, ge=1, description="Rows p taken from each block (None = auto)")
    workers: int = Field(default=1, ge=1, description="Worker threads for pair evaluations")
    batch_order: BatchOrder = Field(default=BatchOrder.NATURAL, description="Alpha enumeration order")
    seed: int = Field(default=0, ge=0, description="Seed of the pair order and shuffles")


class AttackCost(BaseModel):
    """Cost model of the index-recovery attack."""
    batches: int = Field(..., description="ceil(q / (delta - 1)) alpha batches per pair")
    log2_batches: float = Field(..., description="log2 of the batch count")
    rank_ops: float = Field(..., description="Rank computations over F_q")
    fq_ops: float = Field(..., description="F_q operations, (ns)^3 per rank computation")
    log2_fq_ops: float = Field(..., description="log2 of fq_ops")


class AttackReport(BaseModel):
    """Evidence trail of one index-recovery run."""
    status: AttackStatus = Field(..., description="Recovered or undecided")
    recovered_index: Optional[int] = Field(None, description="Recovered file index (0-based)")
    planted_index: Optional[int] = Field(None, description="Planted index when known")
    rows_per_block: int = Field(..., description="Rows p taken from each block")
    aux_target_rank: int = Field(..., description="ns - delta + p")
    aux_rank: int = Field(..., description="Achieved F_q-rank of A")
    aux_rank_beta: int = Field(..., description="Achieved F_q-rank of A_beta")
    aux_deficient: bool = Field(default=False, description="A or A_beta missed the target rank")
    pairs_evaluated: int = Field(default=0, description="Pairs (i, j) tested")
    batch_counts: List[int] = Field(default_factory=list, description="Alpha batches tried per pair")
    search_depths: List[int] = Field(default_factory=list, description="Binary-search rank calls per pair")
    membership_tests: int = Field(default=0, description="Membership tests against Q_beta")
    aux_builds: int = Field(default=0, description="Rank computations spent building A and A_beta")
    rank_ops: int = Field(default=0, description="Rank computations on the decision path")
    rank_calls: int = Field(default=0, description="Every rank computation, pairs evaluated ahead in parallel included")
    wall_time_s: float = Field(default=0.0, description="Wall time in seconds")
    seed: int = Field(default=0, description="Seed of the run")
    workers: int = Field(default=1, description="Worker threads used")
    note: Optional[str] = Field(None, description="Reason when undecided")

    @property
    def correct(self) -> Optional[bool]:
        if self.planted_index is None or self.recovered_index is None:
            return None
        return self.planted_index == self.recovered_index

    def to_key_value(self, exclude: Sequence[str] = ()) -> str:
        """Flat key=value block, one entry per line."""
        lines = []
        for key, value in self.model_dump(mode="json", exclude=set(exclude)).items():
            if isinstance(value, list):
                value = ",".join(str(item) for item in value)
            elif value is None:
                value = ""
            lines.append(f"{key}={value}")
        return "\n".join(lines) + "\n"


class SubqueryOutcome(BaseModel):
    """Deleted-block ranks of the subquery distinguisher."""
    recovered_index: Optional[int] = Field(None, description="Unique low-rank block, None when undecided")
    threshold: int = Field(..., description="sn - delta")
    ranks: List[int] = Field(default_factory=list, description="F_q-rank of Q with block j deleted")
    candidates: List[int] = Field(default_factory=list, description="Blocks whose rank is at most the threshold")


class TrafficReport(BaseModel):
    """Communication of a (session of) CB-cPIR retrieval(s)."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    files: int = Field(..., description="Files retrieved")
    queries: int = Field(..., description="Q matrices uploaded")
    beta_queries: int = Field(..., description="Q_beta matrices uploaded")
    upload_symbols: int = Field(..., description="Uploaded F_{q^s} symbols")
    download_symbols: int = Field(..., description="Downloaded F_{q^s} symbols")
    upload_bits: float = Field(..., description="Uploaded bits")
    download_bits: float = Field(..., description="Downloaded bits")
    rate: Fraction = Field(..., description="Retrieved file bits over communicated bits")


class CheckResult(BaseModel):
    """Result of one self-test check."""
    name: str = Field(..., description="Check name")
    passed: bool = Field(..., description="Whether the check passed")
    detail: str = Field(default="", description="Measured values")
