"""Arithmetic in F_q and F_{q^s}, random bases Gamma and the subspace projections.

Elements of F_q are ``galois`` field scalars; their integer representation packs
the polynomial-basis coordinates base p.  Elements of F_{q^s} are F_q arrays whose
last axis (length s) holds polynomial-basis coordinates over F_q, lowest degree
first, so an r x c matrix over F_{q^s} is an (r, c, s) F_q array.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import galois
import numpy as np

from config.settings import settings
from models.errors import FieldArithmeticError, InvalidParametersError, SingularMatrixError
from models.schemas import ArithOp, SubspacePart

logger = logging.getLogger(__name__)

FieldArray = galois.FieldArray


def _entry_shape(shape) -> Tuple[int, ...]:
    if isinstance(shape, (int, np.integer)):
        return (int(shape),)
    return tuple(shape)


@dataclass(frozen=True)
class FieldSpec:
    """Base field F_q, q = p^e, with its defining modulus over F_p."""
    p: int
    e: int
    modulus: Tuple[int, ...]  # monic, lowest degree first
    GF: type = field(compare=False, hash=False, repr=False)

    @property
    def q(self) -> int:
        return self.p ** self.e

    def element(self, value) -> FieldArray:
        return self.GF(value)

    def coeffs(self, a: FieldArray) -> Tuple[int, ...]:
        """Polynomial-basis coordinates of ``a`` over F_p, lowest degree first."""
        value = int(a)
        digits = []
        for _ in range(self.e):
            value, digit = divmod(value, self.p)
            digits.append(digit)
        return tuple(digits)

    def from_coeffs(self, coeffs: Sequence[int]) -> FieldArray:
        if len(coeffs) != self.e or any(not 0 <= c < self.p for c in coeffs):
            raise InvalidParametersError(f"expected {self.e} residues mod {self.p}, got {tuple(coeffs)}")
        return self.GF(sum(c * self.p ** i for i, c in enumerate(coeffs)))

    def zeros(self, shape) -> FieldArray:
        return self.GF.Zeros(shape)

    def identity(self, size: int) -> FieldArray:
        return self.GF.Identity(size)

    def random(self, shape, rng: np.random.Generator, nonzero: bool = False) -> FieldArray:
        return self.GF.Random(shape, low=1 if nonzero else 0, seed=rng)

    def nonzero_elements(self) -> FieldArray:
        """F_q^x in integer-representation order."""
        return self.GF.elements[1:]


@dataclass(frozen=True, eq=False)
class ExtFieldSpec:
    """Extension F_{q^s} = F_q[x] / (ext_modulus)."""
    base: FieldSpec
    s: int
    ext_modulus: Tuple[int, ...]  # monic, lowest degree first, entries are F_q integer representations
    reduction: FieldArray = field(repr=False)  # row t holds x^t mod ext_modulus, t < 2s - 1

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExtFieldSpec):
            return NotImplemented
        return (self.base, self.s, self.ext_modulus) == (other.base, other.s, other.ext_modulus)

    def __hash__(self) -> int:
        return hash((self.base, self.s, self.ext_modulus))

    @property
    def GF(self) -> type:
        return self.base.GF

    @property
    def order_bits(self) -> float:
        return self.s * self.base.e * math.log2(self.base.p)

    def zeros(self, shape=()) -> FieldArray:
        return self.GF.Zeros(_entry_shape(shape) + (self.s,))

    def one(self) -> FieldArray:
        unit = self.GF.Zeros(self.s)
        unit[0] = 1
        return unit

    def generator(self) -> FieldArray:
        """The class of x, a root of ext_modulus."""
        if self.s == 1:
            return self.GF([int(-self.GF(self.ext_modulus[0]))])
        root = self.GF.Zeros(self.s)
        root[1] = 1
        return root

    def element(self, coeffs: Sequence[int]) -> FieldArray:
        if len(coeffs) != self.s:
            raise InvalidParametersError(f"expected {self.s} coordinates, got {len(coeffs)}")
        return self.GF(list(coeffs))

    def random(self, shape, rng: np.random.Generator) -> FieldArray:
        return self.GF.Random(_entry_shape(shape) + (self.s,), seed=rng)

    def is_zero(self, a: FieldArray) -> bool:
        return not np.any(a.view(np.ndarray))

    def mul(self, a: FieldArray, b: FieldArray) -> FieldArray:
        """Entrywise product, broadcasting over all but the last axis."""
        s = self.s
        lead = np.broadcast_shapes(a.shape[:-1], b.shape[:-1])
        conv = self.GF.Zeros(lead + (2 * s - 1,))
        for i in range(s):
            conv[..., i:i + s] = conv[..., i:i + s] + a[..., i:i + 1] * b
        reduced = conv.reshape(-1, 2 * s - 1) @ self.reduction
        return reduced.reshape(lead + (s,))

    def scale(self, c: FieldArray, a: FieldArray) -> FieldArray:
        """Multiply F_{q^s} entries of ``a`` by F_q scalars ``c`` (broadcast over the entry axes)."""
        return c[..., np.newaxis] * a

    def mult_matrix(self, g: FieldArray) -> FieldArray:
        """s x s matrix M_g over F_q with coords(a * g) = coords(a) @ M_g."""
        return self.mul(self.GF.Identity(self.s), g[np.newaxis, :])

    def inv(self, a: FieldArray) -> FieldArray:
        if self.is_zero(a):
            raise FieldArithmeticError("inverse of zero in F_{q^s}")
        return np.linalg.inv(self.mult_matrix(a))[0]

    def power(self, a: FieldArray, exponent: int) -> FieldArray:
        if exponent < 0:
            return self.power(self.inv(a), -exponent)
        result = self.one()
        base = a.copy()
        while exponent:
            if exponent & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            exponent >>= 1
        return result


def _reduction_table(GF: type, s: int, modulus: Tuple[int, ...]) -> FieldArray:
    table = GF.Zeros((2 * s - 1, s))
    for t in range(s):
        table[t, t] = 1
    low = -GF(list(modulus[:s]))
    for t in range(s, 2 * s - 1):
        prev = table[t - 1]
        shifted = GF.Zeros(s)
        shifted[1:] = prev[:-1]
        table[t] = shifted + prev[s - 1] * low
    return table


def _first_irreducible(GF: type, degree: int) -> galois.Poly:
    """Smallest monic irreducible polynomial of the given degree in integer order."""
    q = GF.order
    for tail in range(q ** degree):
        candidate = galois.Poly.Int(q ** degree + tail, field=GF)
        if candidate.is_irreducible():
            return candidate
    raise InvalidParametersError(f"no irreducible polynomial of degree {degree} over GF({q})")


@lru_cache(maxsize=None)
def make_fields(p: int, e: int, s: int) -> Tuple[FieldSpec, ExtFieldSpec]:
    """Build F_q and F_{q^s} with deterministic moduli; identical inputs give identical specs."""
    if p < 2 or not galois.is_prime(p):
        raise InvalidParametersError(f"characteristic must be prime, got {p}")
    if e < 1 or s < 1:
        raise InvalidParametersError(f"exponent and degree must be positive, got e={e}, s={s}")
    bits = s * e * math.log2(p)
    if bits > settings.max_field_bits:
        raise InvalidParametersError(
            f"log2(q^s) = {bits:.1f} exceeds the configured limit of {settings.max_field_bits} bits"
        )

    if e == 1:
        GF = galois.GF(p)
        modulus = (0, 1)
    else:
        poly = galois.irreducible_poly(p, e, method="min")
        GF = galois.GF(p ** e, irreducible_poly=poly)
        modulus = tuple(int(c) for c in poly.coeffs[::-1])
    base = FieldSpec(p=p, e=e, modulus=modulus, GF=GF)

    ext_poly = _first_irreducible(GF, s)
    ext_modulus = tuple(int(c) for c in ext_poly.coeffs[::-1])
    ext = ExtFieldSpec(base=base, s=s, ext_modulus=ext_modulus,
                       reduction=_reduction_table(GF, s, ext_modulus))
    logger.info(f"Built GF({p}^{e}) and its degree-{s} extension (modulus {ext_modulus})")
    return base, ext


def fq_arith(a: FieldArray, b: Optional[FieldArray], op: ArithOp) -> FieldArray:
    """One F_q operation; ``b`` is ignored by the unary operations."""
    op = ArithOp(op)
    if op == ArithOp.ADD:
        return a + b
    if op == ArithOp.SUB:
        return a - b
    if op == ArithOp.MUL:
        return a * b
    if op == ArithOp.NEG:
        return -a
    if a == 0:
        raise FieldArithmeticError("inverse of zero in F_q")
    return a ** -1


def fqs_arith(ext: ExtFieldSpec, a: FieldArray, b: Optional[FieldArray], op: ArithOp) -> FieldArray:
    """One F_{q^s} operation; ``b`` is ignored by the unary operations."""
    op = ArithOp(op)
    if op == ArithOp.ADD:
        return a + b
    if op == ArithOp.SUB:
        return a - b
    if op == ArithOp.MUL:
        return ext.mul(a, b)
    if op == ArithOp.NEG:
        return -a
    return ext.inv(a)


@dataclass(frozen=True, eq=False)
class GammaBasis:
    """Basis Gamma of F_{q^s} over F_q split as V = <gamma_1..gamma_v>, W = <gamma_v+1..gamma_s>.

    Coordinates are row vectors: poly = gam @ from_gamma and gam = poly @ to_gamma.
    """
    ext: ExtFieldSpec
    gamma: FieldArray
    to_gamma: FieldArray
    from_gamma: FieldArray
    v: int

    @classmethod
    def from_elements(cls, ext: ExtFieldSpec, gamma: FieldArray, v: int) -> "GammaBasis":
        s = ext.s
        if not 1 <= v < s:
            raise InvalidParametersError(f"split must satisfy 1 <= v < s, got v={v}, s={s}")
        gamma = ext.GF(gamma)
        if gamma.shape != (s, s):
            raise InvalidParametersError(f"expected {s} basis elements of length {s}")
        if np.linalg.matrix_rank(gamma) != s:
            raise SingularMatrixError("basis elements are linearly dependent over F_q")
        return cls(ext=ext, gamma=gamma, to_gamma=np.linalg.inv(gamma), from_gamma=gamma.copy(), v=v)

    def coordinates(self, x: FieldArray) -> FieldArray:
        """Gamma-coordinates of F_{q^s} entries (last axis)."""
        return (x.reshape(-1, self.ext.s) @ self.to_gamma).reshape(x.shape)

    def from_coordinates(self, y: FieldArray) -> FieldArray:
        return (y.reshape(-1, self.ext.s) @ self.from_gamma).reshape(y.shape)

    def random_in(self, part: SubspacePart, shape, rng: np.random.Generator) -> FieldArray:
        """Uniform entries of V or W."""
        coords = self.ext.random(shape, rng)
        if SubspacePart(part) == SubspacePart.V:
            coords[..., self.v:] = 0
        else:
            coords[..., :self.v] = 0
        return self.from_coordinates(coords)


def sample_gamma_basis(ext: ExtFieldSpec, v: int, rng: np.random.Generator) -> GammaBasis:
    """Uniformly random basis, resampled until the coordinate matrix is invertible."""
    if not 1 <= v < ext.s:
        raise InvalidParametersError(f"split must satisfy 1 <= v < s, got v={v}, s={ext.s}")
    for _ in range(settings.resample_limit):
        gamma = ext.GF.Random((ext.s, ext.s), seed=rng)
        if np.linalg.matrix_rank(gamma) == ext.s:
            return GammaBasis.from_elements(ext, gamma, v)
    raise SingularMatrixError(f"no invertible basis after {settings.resample_limit} draws")


def project(x: FieldArray, basis: GammaBasis, part: SubspacePart) -> FieldArray:
    """Psi_Gamma^V or Psi_Gamma^W applied entrywise."""
    coords = basis.coordinates(x).copy()
    if SubspacePart(part) == SubspacePart.V:
        coords[..., basis.v:] = 0
    else:
        coords[..., :basis.v] = 0
    return basis.from_coordinates(coords)
