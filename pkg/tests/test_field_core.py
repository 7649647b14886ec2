import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis import settings as hyp_settings

from models.errors import FieldArithmeticError, InvalidParametersError, SingularMatrixError
from models.schemas import ArithOp, SubspacePart
from services.field_core import (
    GammaBasis,
    fq_arith,
    fqs_arith,
    make_fields,
    project,
    sample_gamma_basis,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_make_fields_first_parameter_family():
    base, ext = make_fields(2, 5, 32)
    assert base.q == 32
    assert ext.s == 32
    assert ext.order_bits == pytest.approx(160.0)
    assert len(ext.ext_modulus) == 33 and ext.ext_modulus[-1] == 1


def test_make_fields_is_deterministic():
    first = make_fields(2, 2, 2)
    second = make_fields(2, 2, 2)
    assert first[1] == second[1]
    assert first[1].ext_modulus == second[1].ext_modulus


def test_quadratic_extension_of_gf4_uses_smallest_irreducible():
    _, ext = make_fields(2, 2, 2)
    # x^2 + x + a with a the generator of GF(4)
    assert ext.ext_modulus == (2, 1, 1)


def test_make_fields_rejects_composite_characteristic():
    with pytest.raises(InvalidParametersError):
        make_fields(4, 1, 2)


def test_make_fields_rejects_oversized_extension():
    with pytest.raises(InvalidParametersError):
        make_fields(2, 64, 100)


def test_coefficient_round_trip():
    base, _ = make_fields(2, 4, 2)
    element = base.from_coeffs((1, 0, 1, 1))
    assert base.coeffs(element) == (1, 0, 1, 1)
    with pytest.raises(InvalidParametersError):
        base.from_coeffs((2, 0, 0, 0))


def test_fq_inverse_of_zero_raises():
    base, _ = make_fields(5, 1, 2)
    with pytest.raises(FieldArithmeticError):
        fq_arith(base.element(0), None, ArithOp.INV)
    assert fq_arith(base.element(2), None, ArithOp.INV) == base.element(3)


def test_fqs_inverse_of_zero_raises(toy_fields):
    _, ext = toy_fields
    with pytest.raises(FieldArithmeticError):
        fqs_arith(ext, ext.zeros(), None, ArithOp.INV)


def test_multiplicative_group_order(toy_fields, rng):
    _, ext = toy_fields
    a = ext.random((), rng)
    while ext.is_zero(a):
        a = ext.random((), rng)
    assert np.array_equal(ext.power(a, ext.base.q ** ext.s - 1), ext.one())


def test_generator_is_root_of_modulus(toy_fields):
    _, ext = toy_fields
    x = ext.generator()
    value = ext.zeros()
    for degree, coeff in enumerate(ext.ext_modulus):
        value = value + ext.scale(ext.GF(coeff), ext.power(x, degree))
    assert ext.is_zero(value)


@hyp_settings(max_examples=25, derandomize=True, deadline=None)
@given(seed=seeds)
def test_extension_field_axioms(seed):
    _, ext = make_fields(2, 4, 4)
    rng = np.random.default_rng(seed)
    a, b, c = (ext.random(6, rng) for _ in range(3))
    assert np.array_equal(ext.mul(a, b), ext.mul(b, a))
    assert np.array_equal(ext.mul(ext.mul(a, b), c), ext.mul(a, ext.mul(b, c)))
    assert np.array_equal(ext.mul(a, b + c), ext.mul(a, b) + ext.mul(a, c))
    for element in a:
        if not ext.is_zero(element):
            assert np.array_equal(ext.mul(element, ext.inv(element)), ext.one())


@hyp_settings(max_examples=25, derandomize=True, deadline=None)
@given(seed=seeds)
def test_projections_split_the_field(seed):
    _, ext = make_fields(2, 4, 4)
    rng = np.random.default_rng(seed)
    basis = sample_gamma_basis(ext, 2, rng)
    x = ext.random((3, 5), rng)
    v_part = project(x, basis, SubspacePart.V)
    w_part = project(x, basis, SubspacePart.W)
    assert np.array_equal(v_part + w_part, x)
    assert np.array_equal(project(w_part, basis, SubspacePart.W), w_part)
    assert not np.any(project(v_part, basis, SubspacePart.W).view(np.ndarray))


def test_gamma_coordinates_round_trip(toy_fields, rng):
    _, ext = toy_fields
    basis = sample_gamma_basis(ext, 2, rng)
    x = ext.random((4, 3), rng)
    assert np.array_equal(basis.from_coordinates(basis.coordinates(x)), x)


def test_random_in_stays_in_its_subspace(toy_fields, rng):
    _, ext = toy_fields
    basis = sample_gamma_basis(ext, 2, rng)
    for part in SubspacePart:
        sample = basis.random_in(part, (10, 4), rng)
        assert np.array_equal(project(sample, basis, part), sample)


def test_gamma_basis_rejects_dependent_elements(toy_fields):
    _, ext = toy_fields
    gamma = ext.GF.Zeros((4, 4))
    gamma[0, 0] = gamma[1, 0] = gamma[2, 2] = gamma[3, 3] = 1
    with pytest.raises(SingularMatrixError):
        GammaBasis.from_elements(ext, gamma, 2)


def test_gamma_basis_rejects_bad_split(toy_fields, rng):
    _, ext = toy_fields
    with pytest.raises(InvalidParametersError):
        sample_gamma_basis(ext, 4, rng)


@pytest.mark.slow
@pytest.mark.parametrize("p, e, s", [(3, 1, 4), (5, 1, 3), (3, 2, 2), (7, 1, 2)],
                         ids=["gf3^4", "gf5^3", "gf9^2", "gf7^2"])
def test_extension_field_axioms_odd_characteristic(p, e, s):
    _, ext = make_fields(p, e, s)
    rng = np.random.default_rng(100 * p + 10 * e + s)
    for _ in range(20):
        a, b, c = (ext.random(6, rng) for _ in range(3))
        assert np.array_equal(ext.mul(a, b), ext.mul(b, a))
        assert np.array_equal(ext.mul(ext.mul(a, b), c), ext.mul(a, ext.mul(b, c)))
        assert np.array_equal(ext.mul(a, b + c), ext.mul(a, b) + ext.mul(a, c))
        assert np.array_equal(ext.mul(a, ext.one()), a)
        for element in a:
            if not ext.is_zero(element):
                assert np.array_equal(ext.mul(element, ext.inv(element)), ext.one())


@pytest.mark.slow
@pytest.mark.parametrize("p, e, s", [(2, 4, 4), (3, 1, 4), (5, 1, 3)], ids=["gf16^4", "gf3^4", "gf5^3"])
def test_frobenius_is_additive_and_fixes_the_base_field(p, e, s):
    base, ext = make_fields(p, e, s)
    rng = np.random.default_rng(p + e + s)
    for _ in range(50):
        a, b = ext.random((), rng), ext.random((), rng)
        assert np.array_equal(ext.power(a + b, p), ext.power(a, p) + ext.power(b, p))
        c = base.random((), rng)
        embedded = ext.scale(c, ext.one())
        assert np.array_equal(ext.power(embedded, base.q), embedded)


@pytest.mark.slow
@pytest.mark.parametrize("p, e, s, v", [(2, 4, 4, 2), (3, 1, 4, 1), (5, 1, 3, 2)], ids=["gf16^4", "gf3^4", "gf5^3"])
def test_projection_is_fq_linear(p, e, s, v):
    base, ext = make_fields(p, e, s)
    rng = np.random.default_rng(7 * p + s)
    basis = sample_gamma_basis(ext, v, rng)
    for _ in range(30):
        x, y = ext.random(5, rng), ext.random(5, rng)
        a, b = base.random((), rng), base.random((), rng)
        combined = ext.scale(a, x) + ext.scale(b, y)
        for part in SubspacePart:
            expected = ext.scale(a, project(x, basis, part)) + ext.scale(b, project(y, basis, part))
            assert np.array_equal(project(combined, basis, part), expected)
