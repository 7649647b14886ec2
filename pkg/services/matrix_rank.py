"""Dense matrices over F_q and F_{q^s}, F_q-ranks, and an append-and-rank echelon accumulator."""

import logging
from typing import Dict, List, Tuple

import numpy as np

from models.errors import ShapeMismatchError, SingularMatrixError
from .field_core import ExtFieldSpec, FieldArray, FieldSpec

logger = logging.getLogger(__name__)


def expand_fq(M: FieldArray) -> FieldArray:
    """Write each F_{q^s} entry as its s polynomial-basis coordinates: (r, c, s) -> (r, c*s)."""
    if M.ndim != 3:
        raise ShapeMismatchError(f"expected an (r, c, s) array, got shape {M.shape}")
    rows, cols, s = M.shape
    return M.reshape(rows, cols * s)


def rank_fq(M: FieldArray) -> int:
    """Rank over F_q by Gaussian elimination."""
    if M.ndim != 2:
        raise ShapeMismatchError(f"expected a matrix, got shape {M.shape}")
    if M.size == 0:
        return 0
    return int(np.linalg.matrix_rank(M))


def invert_fq(M: FieldArray) -> FieldArray:
    """Inverse over F_q; SingularMatrixError when M is singular."""
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeMismatchError(f"expected a square matrix, got shape {M.shape}")
    if rank_fq(M) < M.shape[0]:
        raise SingularMatrixError(f"{M.shape[0]}x{M.shape[1]} matrix is singular")
    return np.linalg.inv(M)


def block_matrix(ext: ExtFieldSpec, B: FieldArray) -> FieldArray:
    """F_q matrix of x -> x @ B for a (k, c, s) matrix B over F_{q^s}, shape (k*s, c*s).

    Block (a, b) is the multiplication matrix of B[a, b].
    """
    k, c, s = B.shape
    units = ext.GF.Identity(s)[np.newaxis, np.newaxis, :, :]
    blocks = ext.mul(units, B[:, :, np.newaxis, :])  # [a, b, t, :] = x^t * B[a, b]
    return blocks.transpose(0, 2, 1, 3).reshape(k * s, c * s)


def matmul_fqs(ext: ExtFieldSpec, A: FieldArray, B: FieldArray) -> FieldArray:
    """Product of an (r, k) and a (k, c) matrix over F_{q^s}."""
    if A.ndim != 3 or B.ndim != 3 or A.shape[1] != B.shape[0]:
        raise ShapeMismatchError(f"cannot multiply shapes {A.shape} and {B.shape}")
    rows, inner, s = A.shape
    cols = B.shape[1]
    if rows == 0 or inner == 0:
        return ext.zeros((rows, cols))
    return (A.reshape(rows, inner * s) @ block_matrix(ext, B)).reshape(rows, cols, s)


def invert_fqs(ext: ExtFieldSpec, G: FieldArray) -> FieldArray:
    """Inverse of a square matrix over F_{q^s}, via its F_q block expansion."""
    if G.ndim != 3 or G.shape[0] != G.shape[1]:
        raise ShapeMismatchError(f"expected a square matrix over F_q^s, got shape {G.shape}")
    k, _, s = G.shape
    inverse = invert_fq(block_matrix(ext, G))
    # row 0 of each block is the coordinate vector of 1 * H[a, b]
    return inverse.reshape(k, s, k, s)[:, 0, :, :].copy()


def kron_vec(c: FieldArray, Delta: FieldArray) -> FieldArray:
    """c (x) Delta for an F_q vector c of length m and a (delta, n) matrix over F_{q^s}."""
    if c.ndim != 1 or Delta.ndim != 3:
        raise ShapeMismatchError(f"expected a vector and an (r, c, s) array, got {c.shape} and {Delta.shape}")
    m = c.shape[0]
    rows, cols, s = Delta.shape
    return (c[:, np.newaxis, np.newaxis, np.newaxis] * Delta[np.newaxis]).reshape(m * rows, cols, s)


def _row_to_planes(row: FieldArray, e: int) -> Tuple[int, ...]:
    """Bit-plane k of a GF(2^e) row: bit c is coefficient k of entry c."""
    values = row.view(np.ndarray).astype(np.int64)
    return tuple(
        int.from_bytes(np.packbits(((values >> k) & 1).astype(np.uint8), bitorder="little").tobytes(), "little")
        for k in range(e)
    )


def _planes_to_row(planes: Tuple[int, ...], width: int) -> np.ndarray:
    nbytes = (width + 7) // 8
    values = np.zeros(width, dtype=np.int64)
    for k, plane in enumerate(planes):
        bits = np.unpackbits(np.frombuffer(plane.to_bytes(nbytes, "little"), dtype=np.uint8), bitorder="little")
        values |= bits[:width].astype(np.int64) << k
    return values


def _xor(a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[int, ...]:
    return tuple(x ^ y for x, y in zip(a, b))


class EchelonAccumulator:
    """Reduced row-echelon basis over F_q that grows as rows are appended.

    Over F_{2^e} rows are packed into e bit-plane ints: addition is a word-wide
    XOR per plane and scaling by a constant is a GF(2)-linear mix of the planes.
    Odd characteristic uses vectorized galois row operations.
    """

    def __init__(self, spec: FieldSpec, width: int):
        if width < 1:
            raise ShapeMismatchError(f"accumulator width must be positive, got {width}")
        self.spec = spec
        self.width = width
        self._packed = spec.p == 2
        self._pivots: List[int] = []
        self._planes: Dict[int, Tuple[int, ...]] = {}
        self._products: Dict[int, Tuple[int, ...]] = {}
        self._rows = spec.zeros((0, width))

    @property
    def rank(self) -> int:
        return len(self._pivots)

    @property
    def pivots(self) -> Tuple[int, ...]:
        return tuple(sorted(self._pivots))

    @property
    def basis_rows(self) -> FieldArray:
        """Basis rows ordered by pivot column."""
        if self._packed:
            if not self._pivots:
                return self.spec.zeros((0, self.width))
            return self.spec.GF(np.stack([_planes_to_row(self._planes[pivot], self.width) for pivot in self.pivots]))
        order = np.argsort(self._pivots, kind="stable")
        return self._rows[:self.rank][order]

    def fork(self) -> "EchelonAccumulator":
        """Independent copy of the current state."""
        clone = EchelonAccumulator.__new__(EchelonAccumulator)
        clone.spec = self.spec
        clone.width = self.width
        clone._packed = self._packed
        clone._pivots = list(self._pivots)
        clone._planes = dict(self._planes)
        clone._products = self._products  # cache of scalar images, shared
        clone._rows = self._rows.copy()
        return clone

    def append(self, rows: FieldArray) -> int:
        """Absorb rows; returns how much the rank grew."""
        rows = self.spec.GF(rows)
        if rows.ndim == 1:
            rows = rows[np.newaxis, :]
        if rows.ndim != 2 or rows.shape[1] != self.width:
            raise ShapeMismatchError(f"rows of width {rows.shape[-1]} appended to width {self.width}")
        before = self.rank
        for row in rows:
            if self.rank == self.width:
                break
            if self._packed:
                self._absorb_planes(_row_to_planes(row, self.spec.e))
            else:
                self._absorb(row)
        return self.rank - before

    def contains(self, row: FieldArray) -> bool:
        """Whether ``row`` lies in the current row space."""
        return self.fork().append(row) == 0

    @staticmethod
    def _symbol(planes: Tuple[int, ...], col: int) -> int:
        return sum(((plane >> col) & 1) << k for k, plane in enumerate(planes))

    def _scaled(self, a: int, planes: Tuple[int, ...]) -> Tuple[int, ...]:
        if a == 1:
            return planes
        images = self._products.get(a)
        if images is None:
            # images[k] = a * x^k as an integer
            monomials = self.spec.GF([1 << k for k in range(self.spec.e)])
            images = tuple(int(v) for v in self.spec.GF(a) * monomials)
            self._products[a] = images
        out = [0] * self.spec.e
        for k, plane in enumerate(planes):
            if not plane:
                continue
            image = images[k]
            for j in range(self.spec.e):
                if (image >> j) & 1:
                    out[j] ^= plane
        return tuple(out)

    def _absorb_planes(self, planes: Tuple[int, ...]) -> None:
        for pivot, basis in self._planes.items():
            coeff = self._symbol(planes, pivot)
            if coeff:
                planes = _xor(planes, self._scaled(coeff, basis))
        support = 0
        for plane in planes:
            support |= plane
        if not support:
            return
        col = (support & -support).bit_length() - 1
        lead = self._symbol(planes, col)
        if lead != 1:
            planes = self._scaled(int(self.spec.GF(lead) ** -1), planes)
        for pivot, basis in self._planes.items():
            coeff = self._symbol(basis, col)
            if coeff:
                self._planes[pivot] = _xor(basis, self._scaled(coeff, planes))
        self._planes[col] = planes
        self._pivots.append(col)

    def _absorb(self, row: FieldArray) -> None:
        rank = self.rank
        reduced = row.copy()
        if rank:
            coeffs = reduced[self._pivots]
            reduced = reduced - (coeffs[np.newaxis, :] @ self._rows[:rank])[0]
        nonzero = np.flatnonzero(reduced.view(np.ndarray))
        if nonzero.size == 0:
            return
        col = int(nonzero[0])
        reduced = reduced / reduced[col]
        if rank:
            self._rows[:rank] = self._rows[:rank] - self._rows[:rank, col:col + 1] * reduced[np.newaxis, :]
        if rank == self._rows.shape[0]:
            grown = self.spec.zeros((min(self.width, max(16, 2 * rank)), self.width))
            grown[:rank] = self._rows[:rank]
            self._rows = grown
        self._rows[rank] = reduced
        self._pivots.append(col)


def accumulator_init(spec: FieldSpec, width: int) -> EchelonAccumulator:
    return EchelonAccumulator(spec, width)


def accumulator_append(acc: EchelonAccumulator, rows: FieldArray) -> int:
    return acc.append(rows)
