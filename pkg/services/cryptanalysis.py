"""Attacks on the code-based PIR schemes.

Two distinguishers live here:

* the subquery attack on the original scheme: deleting the block of the
  requested file drops the F_q-rank of the query to at most sn - delta;
* the index-recovery attack on CB-cPIR: an auxiliary matrix A spans the
  code-plus-error space S of Q (plus p Delta rows), so a row
  ``alpha Q^i[r] + Q^j[r]`` fails to raise rank(A) exactly when
  ``alpha c_i + c_j = 0``.  The same alpha applied to Q_beta then raises
  rank(A_beta) iff the requested index is i or j.

All block and row indices are 0-based; block t of Q is rows t*delta .. (t+1)*delta - 1.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from contextlib import closing
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from config.settings import settings
from models.errors import (
    DatabaseTooSmallError,
    InconsistentBatchError,
    InfeasibleAttackError,
    InvalidParametersError,
    ShapeMismatchError,
)
from models.schemas import (
    AttackConfig,
    AttackCost,
    AttackReport,
    AttackStatus,
    BatchOrder,
    SchemeParams,
    SubqueryOutcome,
)
from utils.tracking import AttackMetrics
from .field_core import FieldArray, FieldSpec
from .matrix_rank import EchelonAccumulator, expand_fq, rank_fq
from .pir_scheme import fields_for

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Subquery attack on the original scheme
# ---------------------------------------------------------------------------

def delete_block(Q: FieldArray, j: int, delta: int) -> FieldArray:
    """Q with the delta rows of block j removed."""
    if Q.shape[0] % delta:
        raise ShapeMismatchError(f"query height {Q.shape[0]} is not a multiple of delta={delta}")
    m = Q.shape[0] // delta
    if not 0 <= j < m:
        raise InvalidParametersError(f"block index {j} outside 0..{m - 1}")
    keep = np.r_[0:j * delta, (j + 1) * delta:Q.shape[0]]
    return Q[keep]


def subquery_attack(Q: FieldArray, params: SchemeParams) -> SubqueryOutcome:
    """Find the unique block whose deletion leaves rank at most sn - delta."""
    delta = params.delta
    if (params.m - 1) * delta < params.n:
        raise DatabaseTooSmallError(
            f"subquery attack needs (m-1)*delta >= n, got (m-1)*delta={(params.m - 1) * delta}, n={params.n}"
        )
    if Q.shape[0] != params.m * delta:
        raise ShapeMismatchError(f"query height {Q.shape[0]} does not match m*delta={params.m * delta}")

    threshold = params.fq_width - delta
    ranks = [rank_fq(expand_fq(delete_block(Q, j, delta))) for j in range(params.m)]
    candidates = [j for j, rank in enumerate(ranks) if rank <= threshold]
    recovered = candidates[0] if len(candidates) == 1 else None
    logger.info(f"Subquery attack: threshold {threshold}, {len(candidates)} candidate block(s)")
    return SubqueryOutcome(recovered_index=recovered, threshold=threshold, ranks=ranks, candidates=candidates)


def q_binomial(a: int, b: int, q: int) -> int:
    """Gaussian binomial [a b]_q, the number of b-dimensional subspaces of F_q^a."""
    if not 0 <= b <= a:
        raise InvalidParametersError(f"q-binomial needs a >= b >= 0, got a={a}, b={b}")
    b = min(b, a - b)
    # every partial product is itself [a - b + i, i]_q, so each step divides exactly
    value = 1
    for i in range(1, b + 1):
        value, remainder = divmod(value * (q ** (a - b + i) - 1), q ** i - 1)
        if remainder:
            raise ArithmeticError(f"[{a} {b}]_{q} product formula is not integral at step {i}")
    return value


class SubqueryFailureBound(NamedTuple):
    log2_probability: float
    vacuous: bool


def prop2_bound(params: SchemeParams) -> SubqueryFailureBound:
    """log2 of [sn - delta, sn - 2 delta]_q * q^(-delta^2 (m - 1)), the chance the subquery attack fails."""
    width, delta = params.fq_width, params.delta
    if width < 2 * delta:
        raise InvalidParametersError(f"bound needs sn >= 2 delta, got sn={width}, delta={delta}")
    log2_bound = math.log2(q_binomial(width - delta, width - 2 * delta, params.q)) \
        - delta * delta * (params.m - 1) * params.log2_q
    vacuous = log2_bound > 0
    if vacuous:
        logger.warning(f"Failure bound 2^{log2_bound:.2f} exceeds 1 and says nothing")
    return SubqueryFailureBound(log2_probability=log2_bound, vacuous=vacuous)


# ---------------------------------------------------------------------------
# Index-recovery attack on CB-cPIR
# ---------------------------------------------------------------------------

class QueryBlocks:
    """A query matrix viewed over F_q, addressed by (block, row)."""

    def __init__(self, Q: FieldArray, delta: int):
        if Q.ndim != 3 or Q.shape[0] % delta:
            raise ShapeMismatchError(f"query of shape {Q.shape} is not m blocks of {delta} rows")
        self.rows = expand_fq(Q)
        self.delta = delta
        self.m = Q.shape[0] // delta
        self.width = self.rows.shape[1]

    def row(self, block: int, r: int) -> FieldArray:
        return self.rows[block * self.delta + r]

    def rows_at(self, block: int, start: int, count: int) -> FieldArray:
        base = block * self.delta + start
        return self.rows[base:base + count]


@dataclass
class AuxiliaryMatrix:
    """Accumulator over rows 0..p-1 of the blocks, with its rank against the target ns - delta + p."""
    acc: EchelonAccumulator
    rows_per_block: int
    target_rank: int
    blocks_used: int

    @property
    def rank(self) -> int:
        return self.acc.rank

    @property
    def deficient(self) -> bool:
        return self.acc.rank < self.target_rank


def check_attack_feasible(params: SchemeParams) -> None:
    """Refuse fields too large to enumerate alpha over at desk scale."""
    if params.q >= settings.max_attack_field_order:
        raise InfeasibleAttackError(
            f"q = {params.q} is at or above the configured limit {settings.max_attack_field_order}; "
            f"about 2^{attack_cost(params).log2_fq_ops:.1f} F_q operations, use the cost model instead"
        )


def auto_rows_per_block(params: SchemeParams) -> int:
    return max(1, -(-(params.fq_width - params.delta + 1) // params.m))


def build_auxiliary(Q: FieldArray, params: SchemeParams, p: int, spec: Optional[FieldSpec] = None) -> AuxiliaryMatrix:
    """Absorb rows 0..p-1 of block after block until rank ns - delta + p, or until the blocks run out."""
    spec = spec or fields_for(params)[0]
    free_dim = params.fq_width - params.delta
    if not 1 <= p < params.delta:
        raise InvalidParametersError(f"rows per block must satisfy 1 <= p < delta={params.delta}, got {p}")
    if params.m * p <= free_dim:
        raise DatabaseTooSmallError(f"need m*p > ns - delta, got m*p={params.m * p}, ns - delta={free_dim}")

    blocks = Q if isinstance(Q, QueryBlocks) else QueryBlocks(Q, params.delta)
    target = free_dim + p
    acc = EchelonAccumulator(spec, blocks.width)
    used = 0
    for t in range(blocks.m):
        if acc.rank >= target:
            break
        acc.append(blocks.rows_at(t, 0, p))
        used += 1
    if acc.rank > target:
        raise ArithmeticError(f"auxiliary rank {acc.rank} exceeds the bound {target}")
    aux = AuxiliaryMatrix(acc=acc, rows_per_block=p, target_rank=target, blocks_used=used)
    if aux.deficient:
        logger.warning(f"Auxiliary matrix is rank deficient: {aux.rank} < {target} after all {blocks.m} blocks")
    else:
        logger.info(f"Auxiliary matrix reached rank {aux.rank} from {used} blocks")
    return aux


def _combination_rows(blocks: QueryBlocks, i: int, j: int, alphas: Sequence, start: int) -> FieldArray:
    """Rows alpha_k Q^i[start + k] + Q^j[start + k]."""
    count = len(alphas)
    GF = type(blocks.rows)
    coeffs = GF(np.asarray([int(a) for a in alphas], dtype=np.int64))
    return coeffs[:, np.newaxis] * blocks.rows_at(i, start, count) + blocks.rows_at(j, start, count)


def _deficiency(aux: AuxiliaryMatrix, blocks: QueryBlocks, i: int, j: int, alphas: Sequence) -> int:
    p = aux.rows_per_block
    if len(alphas) > blocks.delta - p:
        raise InvalidParametersError(f"batch of {len(alphas)} exceeds delta - p = {blocks.delta - p}")
    if len(alphas) == 0:
        return 0
    increase = aux.acc.fork().append(_combination_rows(blocks, i, j, alphas, p))
    return len(alphas) - increase


def alpha_batch_test(aux: AuxiliaryMatrix, blocks: QueryBlocks, i: int, j: int, alphas: Sequence) -> bool:
    """True iff appending the batch's combination rows raises rank(A) by less than the batch size."""
    if i == j:
        raise InvalidParametersError("pair indices must differ")
    missing = _deficiency(aux, blocks, i, j, alphas)
    logger.debug(f"Pair ({i}, {j}): batch of {len(alphas)} rank deficiency {missing}")
    return missing > 0


def alpha_binary_search(aux: AuxiliaryMatrix, blocks: QueryBlocks, i: int, j: int,
                        hit_batch: Sequence) -> Tuple[FieldArray, int]:
    """Halve the batch until one alpha is left; returns (alpha, rank calls)."""
    lo, hi = 0, len(hit_batch)
    if hi == 0:
        raise InvalidParametersError("binary search over an empty batch")
    calls = 0
    while hi - lo > 1:
        mid = lo + (hi - lo) // 2
        missing = _deficiency(aux, blocks, i, j, hit_batch[lo:mid])
        calls += 1
        if missing >= 2:
            raise InconsistentBatchError(f"pair ({i}, {j}): {missing} candidates vanish at once")
        if missing == 1:
            hi = mid
        else:
            lo = mid
    bound = math.ceil(math.log2(len(hit_batch))) if len(hit_batch) > 1 else 0
    assert calls <= bound, f"binary search used {calls} rank calls for a batch of {len(hit_batch)}"
    return hit_batch[lo], calls


def pair_membership_test(alpha, blocks_beta: QueryBlocks, aux_beta: AuxiliaryMatrix, i: int, j: int) -> bool:
    """True iff alpha Q_beta^i[p] + Q_beta^j[p] raises rank(A_beta), i.e. alpha beta_i + beta_j != 0."""
    row = _combination_rows(blocks_beta, i, j, [alpha], aux_beta.rows_per_block)
    return aux_beta.acc.fork().append(row) == 1


@dataclass
class PairOutcome:
    i: int
    j: int
    alpha: Optional[int]
    positive: bool
    batches: int
    depth: int

    @property
    def rank_calls(self) -> int:
        return self.batches + self.depth + (1 if self.alpha is not None else 0)


class IndexRecoveryAttack:
    """Coordinator of the pair evaluations against one (Q, Q_beta) pair."""

    def __init__(self, Q: FieldArray, Q_beta: FieldArray, params: SchemeParams,
                 config: Optional[AttackConfig] = None):
        self.params = params
        self.config = config or AttackConfig(workers=settings.workers, seed=settings.default_seed)
        check_attack_feasible(params)
        if Q.shape != Q_beta.shape or Q.shape != (params.m * params.delta, params.n, params.s):
            raise ShapeMismatchError(f"queries of shapes {Q.shape} and {Q_beta.shape} do not match the parameters")

        free_dim = params.fq_width - params.delta
        if params.m * (params.delta - 1) <= free_dim:
            raise DatabaseTooSmallError(
                f"need m*(delta-1) > ns - delta, got {params.m * (params.delta - 1)} <= {free_dim}"
            )
        self.p = self.config.rows_per_block or auto_rows_per_block(params)
        if not 1 <= self.p < params.delta:
            raise InvalidParametersError(f"rows per block must satisfy 1 <= p < delta={params.delta}, got {self.p}")
        self.spec, _ = fields_for(params)
        self.blocks = QueryBlocks(Q, params.delta)
        self.blocks_beta = QueryBlocks(Q_beta, params.delta)

        self._alphas = self.spec.nonzero_elements()
        self._rng = np.random.default_rng(self.config.seed)
        if self.config.batch_order == BatchOrder.SHUFFLED:
            self._alphas = self._alphas[self._rng.permutation(self._alphas.size)]
        self.batches = self._alpha_batches()

        self.aux: Optional[AuxiliaryMatrix] = None
        self.aux_beta: Optional[AuxiliaryMatrix] = None
        self.aux_builds = 0

    def _alpha_batches(self) -> List[FieldArray]:
        batch_size = self.params.delta - self.p
        return [self._alphas[start:start + batch_size] for start in range(0, self._alphas.size, batch_size)]

    def build_auxiliaries(self, metrics: Optional[AttackMetrics] = None) -> bool:
        """Build A and A_beta, raising p until both reach ns - delta + p; False if p runs out first."""
        while True:
            self.aux = build_auxiliary(self.blocks, self.params, self.p, self.spec)
            self.aux_beta = build_auxiliary(self.blocks_beta, self.params, self.p, self.spec)
            self.aux_builds += 2
            if metrics is not None:
                metrics.add_rank_calls(2)
            if not (self.aux.deficient or self.aux_beta.deficient):
                return True
            if self.p + 1 >= self.params.delta:
                return False
            logger.warning(f"Auxiliary ranks {self.aux.rank}/{self.aux_beta.rank} below {self.aux.target_rank}; "
                           f"raising rows per block to {self.p + 1}")
            self.p += 1
            self.batches = self._alpha_batches()

    def evaluate_pair(self, i: int, j: int, metrics: Optional[AttackMetrics] = None) -> PairOutcome:
        """Find alpha with alpha c_i + c_j = 0 and test it against Q_beta."""
        alpha, depth, tried = None, 0, 0
        for batch in self.batches:
            tried += 1
            if alpha_batch_test(self.aux, self.blocks, i, j, batch):
                alpha, depth = alpha_binary_search(self.aux, self.blocks, i, j, batch)
                break
        positive = alpha is not None and pair_membership_test(alpha, self.blocks_beta, self.aux_beta, i, j)
        outcome = PairOutcome(i=i, j=j, alpha=None if alpha is None else int(alpha), positive=positive,
                              batches=tried, depth=depth)
        if metrics is not None:
            metrics.add_rank_calls(outcome.rank_calls)
        return outcome

    def _evaluate_many(self, pairs: List[Tuple[int, int]], metrics: AttackMetrics):
        """Yield outcomes in pair order; up to ``workers`` pairs run at once."""
        workers = self.config.workers
        if workers <= 1:
            for i, j in pairs:
                yield self.evaluate_pair(i, j, metrics)
            return
        with ThreadPoolExecutor(max_workers=workers) as executor:
            for start in range(0, len(pairs), workers):
                chunk = pairs[start:start + workers]
                futures = [executor.submit(self.evaluate_pair, i, j, metrics) for i, j in chunk]
                for future in futures:
                    yield future.result()

    def run(self, planted_index: Optional[int] = None) -> AttackReport:
        metrics = AttackMetrics()
        consumed: List[PairOutcome] = []
        if self.build_auxiliaries(metrics):
            try:
                status, recovered, note = self._search(consumed, metrics)
            except InconsistentBatchError:
                logger.error(f"Attack aborted after {len(consumed)} pairs and {metrics.rank_calls} rank calls")
                raise
        else:
            status, recovered = AttackStatus.UNDECIDED, None
            note = (f"auxiliary ranks {self.aux.rank} and {self.aux_beta.rank} stay below "
                    f"{self.aux.target_rank} at p={self.p}")
        metrics.finish()

        batch_counts = [o.batches for o in consumed]
        search_depths = [o.depth for o in consumed]
        membership_tests = sum(1 for o in consumed if o.alpha is not None)
        logger.debug(f"{metrics.rank_calls} rank calls at {metrics.rank_calls_per_second:.1f}/s")

        report = AttackReport(
            status=status,
            recovered_index=recovered,
            planted_index=planted_index,
            rows_per_block=self.p,
            aux_target_rank=self.aux.target_rank,
            aux_rank=self.aux.rank,
            aux_rank_beta=self.aux_beta.rank,
            aux_deficient=self.aux.deficient or self.aux_beta.deficient,
            pairs_evaluated=len(consumed),
            batch_counts=batch_counts,
            search_depths=search_depths,
            membership_tests=membership_tests,
            aux_builds=self.aux_builds,
            rank_ops=self.aux_builds + sum(batch_counts) + sum(search_depths) + membership_tests,
            rank_calls=metrics.rank_calls,
            wall_time_s=metrics.duration,
            seed=self.config.seed,
            workers=self.config.workers,
            note=note,
        )
        logger.info(f"Index recovery {status.value}: index={recovered}, pairs={len(consumed)}, "
                    f"rank_ops={report.rank_ops}")
        return report

    def _consume(self, outcome: PairOutcome, consumed: List[PairOutcome], metrics: AttackMetrics) -> PairOutcome:
        consumed.append(outcome)
        metrics.add_pair()
        logger.info(f"Pair ({outcome.i}, {outcome.j}): alpha={outcome.alpha}, "
                    f"{'contains' if outcome.positive else 'excludes'} the target")
        return outcome

    def _search(self, consumed: List[PairOutcome],
                metrics: AttackMetrics) -> Tuple[AttackStatus, Optional[int], Optional[str]]:
        candidates = [int(t) for t in self._rng.permutation(self.params.m)]
        eliminated: List[int] = []
        pairs = [(candidates[a], candidates[a + 1]) for a in range(0, len(candidates) - 1, 2)]

        # closing waits for pairs already submitted, so their rank calls are counted
        with closing(self._evaluate_many(pairs, metrics)) as outcomes:
            for outcome in outcomes:
                self._consume(outcome, consumed, metrics)
                if outcome.alpha is None:
                    return AttackStatus.UNDECIDED, None, f"no alpha found for pair ({outcome.i}, {outcome.j})"
                if not outcome.positive:
                    eliminated.extend((outcome.i, outcome.j))
                    continue
                return self._disambiguate(outcome.i, outcome.j, candidates, eliminated, consumed, metrics)

        remaining = [t for t in candidates if t not in eliminated]
        if len(remaining) != 1:
            return AttackStatus.UNDECIDED, None, "every candidate was eliminated"
        if not eliminated:
            return AttackStatus.UNDECIDED, None, "no reference index to verify the last candidate"
        check = self._consume(self.evaluate_pair(remaining[0], eliminated[0], metrics), consumed, metrics)
        if check.positive:
            return AttackStatus.RECOVERED, remaining[0], None
        return AttackStatus.UNDECIDED, None, f"last candidate {remaining[0]} failed verification"

    def _disambiguate(self, i: int, j: int, candidates: List[int], eliminated: List[int],
                      consumed: List[PairOutcome], metrics: AttackMetrics):
        """The target is i or j; pair i with a fresh partner to decide."""
        fresh = [t for t in candidates if t not in (i, j) and t not in eliminated]
        partners = fresh or eliminated
        if not partners:
            return AttackStatus.UNDECIDED, None, f"no partner left to split pair ({i}, {j})"
        check = self._consume(self.evaluate_pair(i, partners[0], metrics), consumed, metrics)
        if check.alpha is None:
            return AttackStatus.UNDECIDED, None, f"no alpha found for pair ({i}, {partners[0]})"
        return AttackStatus.RECOVERED, (i if check.positive else j), None


def recover_index(Q: FieldArray, Q_beta: FieldArray, params: SchemeParams,
                  config: Optional[AttackConfig] = None, planted_index: Optional[int] = None) -> AttackReport:
    """Run the index-recovery attack on a CB-cPIR query pair."""
    return IndexRecoveryAttack(Q, Q_beta, params, config).run(planted_index)


def attack_cost(params: SchemeParams) -> AttackCost:
    """m/2 (ceil(q/(delta-1)) + log2(delta) + 1) rank computations of (ns)^3 F_q operations each."""
    if params.delta < 2:
        raise InvalidParametersError(f"cost model needs delta >= 2, got {params.delta}")
    batches = -(-params.q // (params.delta - 1))
    rank_ops = params.m / 2 * (batches + math.log2(params.delta) + 1)
    fq_ops = rank_ops * params.fq_width ** 3
    return AttackCost(
        batches=batches,
        log2_batches=math.log2(batches),
        rank_ops=rank_ops,
        fq_ops=fq_ops,
        log2_fq_ops=math.log2(fq_ops),
    )
