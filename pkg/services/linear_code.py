"""Random [n, k] linear codes over F_{q^s} with a random information set."""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from config.settings import settings
from models.errors import InvalidParametersError, ShapeMismatchError, SingularMatrixError
from .field_core import ExtFieldSpec, FieldArray
from .matrix_rank import expand_fq, invert_fqs, matmul_fqs, rank_fq

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LinearCode:
    """Generator matrix G (k x n over F_{q^s}), sorted information set I and (G_I)^-1."""
    ext: ExtFieldSpec
    n: int
    k: int
    G: FieldArray
    info_set: Tuple[int, ...]
    G_I_inv: FieldArray

    @property
    def non_info_set(self) -> Tuple[int, ...]:
        info = set(self.info_set)
        return tuple(j for j in range(self.n) if j not in info)

    def fq_basis(self) -> FieldArray:
        """The (k*s, n*s) F_q basis of C: rows x^t * G[a] for every generator row a and t < s."""
        units = self.ext.GF.Identity(self.ext.s)[np.newaxis, :, np.newaxis, :]
        rows = self.ext.mul(units, self.G[:, np.newaxis, :, :])  # (k, s, n, s)
        return rows.reshape(self.k * self.ext.s, self.n * self.ext.s)

    def contains(self, words: FieldArray) -> bool:
        """Whether every row of an (r, n) F_{q^s} matrix is a codeword."""
        if words.ndim == 2:
            words = words[np.newaxis]
        basis = self.fq_basis()
        stacked = np.concatenate([basis.view(np.ndarray), expand_fq(words).view(np.ndarray)], axis=0)
        return rank_fq(self.ext.GF(stacked)) == basis.shape[0]


def sample_code(ext: ExtFieldSpec, n: int, k: int, rng: np.random.Generator) -> LinearCode:
    """Uniform full-rank generator matrix and a uniform information set with invertible columns."""
    if not 1 <= k < n:
        raise InvalidParametersError(f"code dimension must satisfy 1 <= k < n, got n={n}, k={k}")

    for _ in range(settings.resample_limit):
        G = ext.random((k, n), rng)
        # a uniform k-subset is invertible with overwhelming probability once G has rank k
        for _ in range(settings.resample_limit):
            info_set = tuple(sorted(int(j) for j in rng.choice(n, size=k, replace=False)))
            try:
                G_I_inv = invert_fqs(ext, G[:, list(info_set), :])
            except SingularMatrixError:
                continue
            logger.debug(f"Sampled [{n},{k}] code with information set {info_set}")
            return LinearCode(ext=ext, n=n, k=k, G=G, info_set=info_set, G_I_inv=G_I_inv)
        logger.debug("No invertible information set for this draw, resampling G")

    raise SingularMatrixError(f"no [{n},{k}] code with an invertible information set after "
                              f"{settings.resample_limit} draws")


def encode(code: LinearCode, msg: FieldArray) -> FieldArray:
    """msg @ G for a length-k message (or an (r, k) batch of messages)."""
    single = msg.ndim == 2
    batch = msg[np.newaxis] if single else msg
    if batch.ndim != 3 or batch.shape[1] != code.k:
        raise ShapeMismatchError(f"message of shape {msg.shape} does not match code dimension {code.k}")
    words = matmul_fqs(code.ext, batch, code.G)
    return words[0] if single else words


def codeword_from_info(code: LinearCode, vals: FieldArray) -> FieldArray:
    """The unique codeword agreeing with ``vals`` on the information set: (vals @ G_I^-1) @ G."""
    single = vals.ndim == 2
    batch = vals[np.newaxis] if single else vals
    if batch.ndim != 3 or batch.shape[1] != code.k:
        raise ShapeMismatchError(f"values of shape {vals.shape} do not match information set size {code.k}")
    words = matmul_fqs(code.ext, matmul_fqs(code.ext, batch, code.G_I_inv), code.G)
    return words[0] if single else words
