from fractions import Fraction

import numpy as np
import pytest

from models.errors import InvalidParametersError, MissingBetaResponseError, SessionLimitError, ShapeMismatchError
from models.schemas import SchemeParams, SubspacePart
from services.field_core import project
from services.linear_code import codeword_from_info
from services.matrix_rank import kron_vec, rank_fq
from services.pir_scheme import (
    Database,
    PIRSession,
    Response,
    extract_cbcpir,
    extract_original,
    pack_database,
    query_cbcpir,
    query_original,
    random_database,
    server_answer,
    traffic_accounting,
    unpack_database,
)


def test_pack_and_unpack(toy_fields, rng):
    base, _ = toy_fields
    files = [base.random((5, 12), rng) for _ in range(4)]
    db = pack_database(files)
    assert db.X.shape == (5, 48)
    for original, unpacked in zip(files, unpack_database(db)):
        assert np.array_equal(original, unpacked)


def test_single_file_database(toy_fields, rng):
    base, _ = toy_fields
    block = base.random((3, 12), rng)
    assert np.array_equal(pack_database([block]).X, block)


def test_pack_rejects_mismatched_files(toy_fields, rng):
    base, _ = toy_fields
    with pytest.raises(ShapeMismatchError):
        pack_database([base.random((5, 12), rng), base.random((4, 12), rng)])


def test_original_query_structure(toy_params, rng):
    bundle, secret = query_original(toy_params, 3, rng)
    material = secret.main
    info = list(material.code.info_set)
    assert bundle.Q.shape == (toy_params.m * toy_params.delta, toy_params.n, toy_params.s)
    assert bundle.Q_beta is None
    assert not np.any(material.E[:, info].view(np.ndarray))
    assert not np.any(material.Delta[:, info].view(np.ndarray))
    assert np.array_equal(project(material.E, material.basis, SubspacePart.V), material.E)
    assert np.array_equal(project(material.Delta, material.basis, SubspacePart.W), material.Delta)
    codewords = bundle.Q - material.E - kron_vec(secret.c, material.Delta)
    assert material.code.contains(codewords)
    assert rank_fq(material.flat_inv) == toy_params.delta


def test_original_round_trip(toy_params):
    for seed in range(5):
        rng = np.random.default_rng(seed)
        db = random_database(toy_params, rng)
        i0 = int(rng.integers(toy_params.m))
        bundle, secret = query_original(toy_params, i0, rng)
        assert np.array_equal(extract_original(server_answer(db, bundle), secret, toy_params), db.file(i0))


def test_response_minus_codeword_vanishes_on_information_set(toy_params, rng):
    db = random_database(toy_params, rng)
    bundle, secret = query_original(toy_params, 0, rng)
    R = server_answer(db, bundle).R
    code = secret.main.code
    A = codeword_from_info(code, R[:, list(code.info_set)])
    assert not np.any((R - A)[:, list(code.info_set)].view(np.ndarray))


def test_zero_database_gives_zero_file(toy_params, toy_fields, rng):
    base, _ = toy_fields
    db = Database(X=base.zeros((toy_params.L, toy_params.m * toy_params.delta)), m=toy_params.m,
                  delta=toy_params.delta)
    bundle, secret = query_original(toy_params, 1, rng)
    response = server_answer(db, bundle)
    assert not np.any(response.R.view(np.ndarray))
    assert not np.any(extract_original(response, secret, toy_params).view(np.ndarray))


def test_server_answer_is_linear_and_selects_rows(toy_params, toy_fields, rng):
    base, _ = toy_fields
    bundle, _ = query_original(toy_params, 2, rng)
    first, second = random_database(toy_params, rng), random_database(toy_params, rng)
    combined = Database(X=first.X + second.X, m=first.m, delta=first.delta)
    assert np.array_equal(server_answer(combined, bundle).R,
                          server_answer(first, bundle).R + server_answer(second, bundle).R)
    X = base.zeros(first.X.shape)
    X[0, 7] = 1
    selector = Database(X=X, m=first.m, delta=first.delta)
    assert np.array_equal(server_answer(selector, bundle).R[0], bundle.Q[7])


def test_cbcpir_round_trip_and_coefficients(toy_params):
    for seed in range(5):
        rng = np.random.default_rng(seed)
        db = random_database(toy_params, rng)
        i0 = int(rng.integers(toy_params.m))
        bundle, secret = query_cbcpir(toy_params, i0, rng)
        assert bundle.Q_beta is not None
        assert np.all(secret.c != 0)
        others = [t for t in range(toy_params.m) if t != i0]
        assert np.array_equal(secret.c[others], secret.beta[others])
        assert np.array_equal(extract_cbcpir(server_answer(db, bundle), secret, toy_params), db.file(i0))


def test_cbcpir_single_file_database(toy_params, rng):
    params = toy_params.with_updates(m=1)
    db = random_database(params, rng)
    bundle, secret = query_cbcpir(params, 0, rng)
    assert np.array_equal(extract_cbcpir(server_answer(db, bundle), secret, params), db.file(0))


def test_cbcpir_needs_more_than_two_elements():
    params = SchemeParams(q_base=2, q_exp=1, s=4, v=2, n=12, k=6, m=4)
    with pytest.raises(InvalidParametersError):
        query_cbcpir(params, 0, np.random.default_rng(0))


def test_session_reuses_beta(toy_params, rng):
    params = toy_params.with_updates(f=3)
    db = random_database(params, rng)
    session = PIRSession(params, rng)
    minus_one = -session.beta[0] ** 0
    assert np.all(session.beta != 0) and np.all(session.beta != minus_one)
    for n_query, target in enumerate((4, 11, 4)):
        bundle, secret = session.query(target)
        assert (bundle.Q_beta is not None) == (n_query == 0)
        assert np.array_equal(secret.beta, session.beta)
        assert np.array_equal(session.extract(server_answer(db, bundle), secret), db.file(target))
    with pytest.raises(SessionLimitError):
        session.query(0)
    traffic = traffic_accounting(params, session)
    assert traffic.queries == 3 and traffic.beta_queries == 1


def test_extraction_needs_beta_response(toy_params, rng):
    db = random_database(toy_params, rng)
    bundle, secret = query_cbcpir(toy_params, 5, rng)
    response = server_answer(db, bundle)
    with pytest.raises(MissingBetaResponseError):
        extract_cbcpir(Response(R=response.R), secret, toy_params)


def test_query_index_out_of_range(toy_params, rng):
    with pytest.raises(InvalidParametersError):
        query_original(toy_params, toy_params.m, rng)


def test_traffic_matches_closed_form():
    params = SchemeParams(q_base=2, q_exp=5, s=32, v=31, n=100, k=50, m=100, L=1000, f=1)
    traffic = traffic_accounting(params)
    assert traffic.rate == Fraction(250000, 192000000)
    assert traffic.upload_symbols == 2 * 100 * 50 * 100
    assert traffic.download_symbols == 2 * 1000 * 100
    assert traffic.upload_bits == pytest.approx(traffic.upload_symbols * 32 * 5)


def test_traffic_large_f_halves_the_overhead():
    params = SchemeParams(q_base=2, q_exp=5, s=32, v=31, n=100, k=50, m=100, L=1000, f=1)
    many = params.with_updates(f=10**6)
    single, amortized = traffic_accounting(params).rate, traffic_accounting(many).rate
    assert amortized / single == Fraction(2 * 10**6, 10**6 + 1)


@pytest.mark.slow
@pytest.mark.parametrize("query, extract", [(query_original, extract_original), (query_cbcpir, extract_cbcpir)],
                         ids=["original", "cbcpir"])
def test_round_trips_over_many_seeds(toy_params, query, extract):
    retrieved = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        db = random_database(toy_params, rng)
        i0 = int(rng.integers(toy_params.m))
        bundle, secret = query(toy_params, i0, rng)
        retrieved += np.array_equal(extract(server_answer(db, bundle), secret, toy_params), db.file(i0))
    assert retrieved == 100
