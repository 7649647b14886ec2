import numpy as np
import pytest

from models.errors import ArtifactIOError, CodecError
from services.field_core import make_fields
from utils.file_utils import FileUtils, FrameKind


@pytest.mark.parametrize("q_base, q_exp, bits", [(2, 4, 4), (5, 1, 2), (2**32 - 5, 1, 31)])
def test_bits_per_symbol(q_base, q_exp, bits):
    assert FileUtils.bits_per_symbol(q_base ** q_exp) == bits


@pytest.mark.parametrize("q_base, q_exp", [(2, 4), (5, 1)])
def test_bytes_survive_a_file(q_base, q_exp):
    base, _ = make_fields(q_base, q_exp, 2)
    data = b"private information retrieval"
    block = FileUtils.bytes_to_file(data, base.GF, delta=12, rows=10)
    assert block.shape == (10, 12)
    assert FileUtils.file_to_bytes(block, len(data)) == data


def test_bytes_that_do_not_fit():
    with pytest.raises(CodecError):
        FileUtils.bytes_to_symbols(b"\xff" * 10, 16, 4)
    with pytest.raises(CodecError):
        FileUtils.bytes_to_symbols(b"\x01", 1, 4)


def test_symbol_width():
    assert FileUtils.symbol_width(2) == 1
    assert FileUtils.symbol_width(256) == 1
    assert FileUtils.symbol_width(257) == 2
    assert FileUtils.symbol_width(2**32 - 5) == 4
    assert FileUtils.symbol_width(2**61 - 1) == 8
    with pytest.raises(CodecError):
        FileUtils.symbol_width(2**104)


def test_frames_round_trip(tmp_path, toy_fields, rng):
    base, ext = toy_fields
    X = base.random((5, 24), rng)
    Q = ext.random((24, 12), rng)
    frames = [FileUtils.encode_frame(FrameKind.DATABASE, X, 2, 4),
              FileUtils.encode_frame(FrameKind.QUERY, Q, 2, 4, s=4)]
    path = FileUtils.write_frames(tmp_path / "frames.bin", frames)
    decoded = FileUtils.read_frames(path)
    assert [header["kind"] for header, _ in decoded] == [FrameKind.DATABASE, FrameKind.QUERY]
    assert decoded[1][0]["s"] == 4 and decoded[1][0]["dims"] == (24, 12, 4)
    assert np.array_equal(decoded[0][1], X.view(np.ndarray))
    assert np.array_equal(decoded[1][1], Q.view(np.ndarray))


def test_frame_errors(toy_fields, rng):
    base, _ = toy_fields
    frame = FileUtils.encode_frame(FrameKind.RESPONSE, base.random((3, 3), rng), 2, 4)
    with pytest.raises(CodecError):
        FileUtils.decode_frame(b"XXXX" + frame[4:])
    with pytest.raises(CodecError):
        FileUtils.decode_frame(frame[:4] + bytes([9]) + frame[5:])
    with pytest.raises(CodecError):
        FileUtils.decode_frame(frame[:-1])
    with pytest.raises(CodecError):
        FileUtils.decode_frame(frame[:10])
    with pytest.raises(CodecError):
        FileUtils.decode_frame(frame[:5] + bytes([42]) + frame[6:])


def test_symbol_out_of_range():
    frame = FileUtils.encode_frame(FrameKind.DATABASE, np.array([[3, 7]]), 5, 1)
    with pytest.raises(CodecError):
        FileUtils.decode_frame(frame)


def test_key_value_files(tmp_path):
    path = FileUtils.write_key_value(tmp_path / "report.txt", {"status": "recovered", "recovered_index": 17,
                                                               "note": ""})
    assert FileUtils.read_key_value(path) == {"status": "recovered", "recovered_index": "17", "note": ""}
    with pytest.raises(ArtifactIOError):
        FileUtils.read_key_value(tmp_path / "missing.txt")


def test_output_dir_is_created(tmp_path):
    target = tmp_path / "nested" / "artifacts"
    assert FileUtils.ensure_output_dir(target) == target
    assert target.is_dir()
