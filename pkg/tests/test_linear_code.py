import numpy as np
import pytest

from models.errors import InvalidParametersError, ShapeMismatchError
from services.linear_code import codeword_from_info, encode, sample_code
from services.matrix_rank import matmul_fqs, rank_fq


def test_sampled_code_invariants(toy_fields, rng):
    _, ext = toy_fields
    for _ in range(10):
        code = sample_code(ext, 10, 5, rng)
        assert code.G.shape == (5, 10, 4)
        assert rank_fq(code.fq_basis()) == 5 * 4
        assert len(code.info_set) == 5 and list(code.info_set) == sorted(code.info_set)
        identity = matmul_fqs(ext, code.G_I_inv, code.G[:, list(code.info_set), :])
        assert np.array_equal(identity[..., 0], ext.GF.Identity(5))
        assert not np.any(identity[..., 1:].view(np.ndarray))


def test_smallest_code(toy_fields, rng):
    _, ext = toy_fields
    code = sample_code(ext, 2, 1, rng)
    assert code.non_info_set == tuple({0, 1} - set(code.info_set))


def test_invalid_dimension(toy_fields, rng):
    _, ext = toy_fields
    with pytest.raises(InvalidParametersError):
        sample_code(ext, 5, 5, rng)


def test_encode_zero_and_unit_messages(toy_fields, rng):
    _, ext = toy_fields
    code = sample_code(ext, 12, 6, rng)
    assert ext.is_zero(encode(code, ext.zeros(6)))
    unit = ext.zeros(6)
    unit[2, 0] = 1
    assert np.array_equal(encode(code, unit), code.G[2])


def test_encode_rejects_wrong_length(toy_fields, rng):
    _, ext = toy_fields
    code = sample_code(ext, 12, 6, rng)
    with pytest.raises(ShapeMismatchError):
        encode(code, ext.zeros(5))


def test_information_set_interpolation(toy_fields, rng):
    _, ext = toy_fields
    code = sample_code(ext, 12, 6, rng)
    words = encode(code, ext.random((200, 6), rng))
    rebuilt = codeword_from_info(code, words[:, list(code.info_set), :])
    assert np.array_equal(rebuilt, words)
    assert ext.is_zero(codeword_from_info(code, ext.zeros(6)))


def test_codewords_closed_under_combination(toy_fields, rng):
    _, ext = toy_fields
    code = sample_code(ext, 12, 6, rng)
    words = encode(code, ext.random((2, 6), rng))
    scalar = ext.random((), rng)
    combination = ext.mul(scalar, words[0]) + words[1]
    assert code.contains(combination)
    assert code.contains(words)
    assert not code.contains(ext.random((3, 12), rng))
