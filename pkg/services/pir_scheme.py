"""The original code-based PIR scheme and CB-cPIR: database packing, queries, answers, extraction.

Database layout: file t occupies columns t*delta .. (t+1)*delta - 1 of the L x m*delta matrix X.
A query Q = D + E + c (x) Delta has m*delta rows; row t*delta + r carries c_t * Delta[r].
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config.settings import settings
from models.errors import (
    InvalidParametersError,
    MissingBetaResponseError,
    SessionLimitError,
    ShapeMismatchError,
    SingularMatrixError,
)
from models.schemas import SchemeKind, SchemeParams, SubspacePart, TrafficReport
from .field_core import ExtFieldSpec, FieldArray, FieldSpec, GammaBasis, make_fields, project, sample_gamma_basis
from .linear_code import LinearCode, codeword_from_info, sample_code
from .matrix_rank import invert_fq, kron_vec, matmul_fqs, rank_fq

logger = logging.getLogger(__name__)


def fields_for(params: SchemeParams) -> Tuple[FieldSpec, ExtFieldSpec]:
    return make_fields(params.q_base, params.q_exp, params.s)


@dataclass(frozen=True, eq=False)
class Database:
    """L x m*delta matrix over F_q holding m files side by side."""
    X: FieldArray
    m: int
    delta: int

    @property
    def L(self) -> int:
        return self.X.shape[0]

    def file(self, t: int) -> FieldArray:
        if not 0 <= t < self.m:
            raise InvalidParametersError(f"file index {t} outside 0..{self.m - 1}")
        return self.X[:, t * self.delta:(t + 1) * self.delta]


def pack_database(files: Sequence[FieldArray]) -> Database:
    if not files:
        raise ShapeMismatchError("a database needs at least one file")
    shape = files[0].shape
    if len(shape) != 2:
        raise ShapeMismatchError(f"files must be L x delta matrices, got shape {shape}")
    for t, block in enumerate(files):
        if block.shape != shape:
            raise ShapeMismatchError(f"file {t} has shape {block.shape}, expected {shape}")
    GF = type(files[0])
    X = GF(np.concatenate([block.view(np.ndarray) for block in files], axis=1))
    return Database(X=X, m=len(files), delta=shape[1])


def unpack_database(db: Database) -> List[FieldArray]:
    return [db.file(t).copy() for t in range(db.m)]


def random_database(params: SchemeParams, rng: np.random.Generator) -> Database:
    base, _ = fields_for(params)
    X = base.random((params.L, params.m * params.delta), rng)
    return Database(X=X, m=params.m, delta=params.delta)


@dataclass(frozen=True, eq=False)
class QueryMaterial:
    """Secret side of one query matrix: code, basis, Delta and the inverse of the flattened Delta~."""
    code: LinearCode
    basis: GammaBasis
    Delta: FieldArray
    D: FieldArray
    E: FieldArray
    flat_inv: FieldArray


@dataclass(frozen=True, eq=False)
class ClientSecret:
    scheme: SchemeKind
    i0: int
    c: FieldArray
    main: QueryMaterial
    beta: Optional[FieldArray] = None
    beta_side: Optional[QueryMaterial] = None


@dataclass(frozen=True, eq=False)
class QueryBundle:
    Q: FieldArray
    Q_beta: Optional[FieldArray] = None


@dataclass(frozen=True, eq=False)
class Response:
    R: FieldArray
    R_beta: Optional[FieldArray] = None


def _sample_delta(params: SchemeParams, ext: ExtFieldSpec, basis: GammaBasis,
                  non_info: Sequence[int], rng: np.random.Generator) -> Tuple[FieldArray, FieldArray]:
    """Delta over W, zero on I, with invertible flattening; flattening is position-major then gamma index."""
    delta, redundancy, s, v = params.delta, params.n - params.k, params.s, params.v
    for _ in range(settings.resample_limit):
        z = ext.GF.Random((delta, redundancy, s - v), seed=rng)
        flat = z.reshape(delta, delta)
        if rank_fq(flat) < delta:
            continue
        coords = ext.GF.Zeros((delta, redundancy, s))
        coords[..., v:] = z
        Delta = ext.zeros((delta, params.n))
        Delta[:, list(non_info), :] = basis.from_coordinates(coords)
        return Delta, invert_fq(flat)
    raise SingularMatrixError(f"no invertible Delta after {settings.resample_limit} draws")


def _build_query(params: SchemeParams, coeffs: FieldArray,
                 rng: np.random.Generator) -> Tuple[FieldArray, QueryMaterial]:
    _, ext = fields_for(params)
    rows = params.m * params.delta
    code = sample_code(ext, params.n, params.k, rng)
    basis = sample_gamma_basis(ext, params.v, rng)
    non_info = list(code.non_info_set)

    D = matmul_fqs(ext, ext.random((rows, params.k), rng), code.G)
    E = ext.zeros((rows, params.n))
    E[:, non_info, :] = basis.random_in(SubspacePart.V, (rows, len(non_info)), rng)
    Delta, flat_inv = _sample_delta(params, ext, basis, non_info, rng)

    Q = D + E + kron_vec(coeffs, Delta)
    material = QueryMaterial(code=code, basis=basis, Delta=Delta, D=D, E=E, flat_inv=flat_inv)
    return Q, material


def _check_index(params: SchemeParams, i0: int) -> None:
    if not 0 <= i0 < params.m:
        raise InvalidParametersError(f"file index {i0} outside 0..{params.m - 1}")


def query_original(params: SchemeParams, i0: int,
                   rng: np.random.Generator) -> Tuple[QueryBundle, ClientSecret]:
    """Q = D + E + e_i0 (x) Delta."""
    _check_index(params, i0)
    base, _ = fields_for(params)
    c = base.zeros(params.m)
    c[i0] = 1
    Q, material = _build_query(params, c, rng)
    logger.info(f"Built original query for file {i0} ({Q.shape[0]} x {Q.shape[1]} over F_q^{params.s})")
    return QueryBundle(Q=Q), ClientSecret(scheme=SchemeKind.ORIGINAL, i0=i0, c=c, main=material)


def _require_cbcpir_field(params: SchemeParams) -> None:
    if params.q < 3:
        raise InvalidParametersError("CB-cPIR needs q >= 3: over F_2 the entry 1 + beta_i0 always vanishes")


def sample_beta(base: FieldSpec, m: int, rng: np.random.Generator, avoid_minus_one=None) -> FieldArray:
    """beta in (F_q^x)^m, resampling the entries at ``avoid_minus_one`` (all if True) that equal -1."""
    beta = base.random(m, rng, nonzero=True)
    minus_one = -base.GF(1)
    if avoid_minus_one is True:
        mask = np.ones(m, dtype=bool)
    else:
        mask = np.zeros(m, dtype=bool)
        if avoid_minus_one is not None:
            mask[avoid_minus_one] = True
    for _ in range(settings.resample_limit):
        bad = mask & (beta == minus_one)
        if not bad.any():
            return beta
        beta[bad] = base.random(int(bad.sum()), rng, nonzero=True)
    raise InvalidParametersError(f"could not draw beta avoiding -1 after {settings.resample_limit} draws")


class PIRSession:
    """Client state for retrieving up to f files with one beta and one Q_beta / R_beta exchange."""

    def __init__(self, params: SchemeParams, rng: np.random.Generator):
        _require_cbcpir_field(params)
        self.params = params
        self.rng = rng
        base, _ = fields_for(params)
        # every entry avoids -1 so c = e_i0 + beta has no zero entry for any later i0
        self.beta = sample_beta(base, params.m, rng, avoid_minus_one=True)
        self.beta_side: Optional[QueryMaterial] = None
        self.R_beta: Optional[FieldArray] = None
        self.requested: List[int] = []

    @property
    def queries_issued(self) -> int:
        return len(self.requested)

    @property
    def beta_queries(self) -> int:
        return 0 if self.beta_side is None else 1

    def query(self, i0: int) -> Tuple[QueryBundle, ClientSecret]:
        return query_cbcpir(self.params, i0, self.rng, session=self)

    def receive(self, response: Response) -> None:
        if response.R_beta is not None and self.R_beta is None:
            self.R_beta = response.R_beta

    def extract(self, response: Response, secret: ClientSecret) -> FieldArray:
        self.receive(response)
        return extract_cbcpir(response, secret, self.params, session=self)


def query_cbcpir(params: SchemeParams, i0: int, rng: np.random.Generator,
                 session: Optional[PIRSession] = None) -> Tuple[QueryBundle, ClientSecret]:
    """Q = D + E + (e_i0 + beta) (x) Delta and Q_beta = D_beta + E_beta + beta (x) Delta_beta.

    Inside a session beta is fixed and Q_beta goes out with the first query only.
    """
    _check_index(params, i0)
    _require_cbcpir_field(params)
    base, _ = fields_for(params)

    Q_beta = None
    if session is None:
        beta = sample_beta(base, params.m, rng, avoid_minus_one=[i0])
        Q_beta, beta_side = _build_query(params, beta, rng)
    else:
        if session.queries_issued >= params.f:
            raise SessionLimitError(f"session already served its f={params.f} files")
        beta = session.beta
        if session.beta_side is None:
            Q_beta, session.beta_side = _build_query(params, beta, rng)
        beta_side = session.beta_side

    c = beta.copy()
    c[i0] = c[i0] + base.GF(1)
    Q, material = _build_query(params, c, rng)
    if session is not None:
        session.requested.append(i0)
    logger.info(f"Built CB-cPIR query for file {i0}" + ("" if Q_beta is not None else " (reusing beta)"))
    secret = ClientSecret(scheme=SchemeKind.CBCPIR, i0=i0, c=c, main=material, beta=beta, beta_side=beta_side)
    return QueryBundle(Q=Q, Q_beta=Q_beta), secret


def _answer(X: FieldArray, Q: FieldArray) -> FieldArray:
    rows, n, s = Q.shape
    if X.shape[1] != rows:
        raise ShapeMismatchError(f"database width {X.shape[1]} does not match query height {rows}")
    return (X @ Q.reshape(rows, n * s)).reshape(X.shape[0], n, s)


def server_answer(db: Database, bundle: QueryBundle) -> Response:
    """R = X @ Q, and R_beta = X @ Q_beta when Q_beta is present."""
    R = _answer(db.X, bundle.Q)
    R_beta = None if bundle.Q_beta is None else _answer(db.X, bundle.Q_beta)
    return Response(R=R, R_beta=R_beta)


def _payload(R: FieldArray, material: QueryMaterial, params: SchemeParams) -> FieldArray:
    """X (c (x) I_delta) for the coefficient vector c the material was built with."""
    code = material.code
    if R.ndim != 3 or R.shape[1:] != (params.n, params.s):
        raise ShapeMismatchError(f"response of shape {R.shape} does not match n={params.n}, s={params.s}")
    A = codeword_from_info(code, R[:, list(code.info_set), :])
    residue = project(R - A, material.basis, SubspacePart.W)
    coords = material.basis.coordinates(residue)[:, list(code.non_info_set), params.v:]
    return coords.reshape(R.shape[0], params.delta) @ material.flat_inv


def extract_original(resp: Response, secret: ClientSecret, params: SchemeParams) -> FieldArray:
    return _payload(resp.R, secret.main, params)


def extract_cbcpir(resp: Response, secret: ClientSecret, params: SchemeParams,
                   session: Optional[PIRSession] = None) -> FieldArray:
    """X(c (x) I) - X(beta (x) I) = X^{i0}."""
    R_beta = resp.R_beta
    if R_beta is None and session is not None:
        R_beta = session.R_beta
    if R_beta is None or secret.beta_side is None:
        raise MissingBetaResponseError("no R_beta available for this query")
    return _payload(resp.R, secret.main, params) - _payload(R_beta, secret.beta_side, params)


def traffic_accounting(params: SchemeParams, session: Optional[PIRSession] = None) -> TrafficReport:
    """Upload/download of a session; without a session, a full f-file session is assumed."""
    if session is None:
        files, beta_queries = params.f, 1
    else:
        files, beta_queries = session.queries_issued, session.beta_queries
    matrices = files + beta_queries
    per_query = params.m * params.delta * params.n
    per_response = params.L * params.n
    upload_symbols = matrices * per_query
    download_symbols = matrices * per_response
    symbol_bits = params.s * params.log2_q

    # log2(q) cancels between file bits and F_{q^s} symbol bits
    denominator = matrices * (per_query + per_response) * params.s
    rate = Fraction(files * params.L * params.delta, denominator) if denominator else Fraction(0)
    return TrafficReport(
        files=files,
        queries=files,
        beta_queries=beta_queries,
        upload_symbols=upload_symbols,
        download_symbols=download_symbols,
        upload_bits=upload_symbols * symbol_bits,
        download_bits=download_symbols * symbol_bits,
        rate=rate,
    )
