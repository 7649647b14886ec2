"""File utility functions: artifact writing, key=value files, byte packing and the framed binary codec.

Frame layout (all integers little-endian)::

    magic   4 bytes  b"CBPR"
    version u8       1
    kind    u8       FrameKind
    p       u64      characteristic
    e       u16      q = p^e
    s       u16      extension degree (1 for F_q matrices)
    width   u8       bytes per symbol
    ndim    u8
    dims    ndim x u32
    symbols prod(dims) x width bytes, integer representation of each F_q symbol
"""

import csv
import json
import logging
import os
import struct
from enum import IntEnum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np
from dotenv import dotenv_values

from config.settings import settings
from models.errors import ArtifactIOError, CodecError

logger = logging.getLogger(__name__)

MAGIC = b"CBPR"
VERSION = 1
_HEADER = struct.Struct("<4sBBQHHBB")


class FrameKind(IntEnum):
    DATABASE = 1
    QUERY = 2
    QUERY_BETA = 3
    RESPONSE = 4
    RESPONSE_BETA = 5


class FileUtils:
    """Utility class for artifact I/O."""

    SYMBOL_WIDTHS = (1, 2, 4, 8)

    @classmethod
    def ensure_output_dir(cls, directory: Union[str, Path, None] = None) -> Path:
        """Create the output directory if needed."""
        path = Path(directory or settings.output_dir)
        try:
            path.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ArtifactIOError(f"cannot create output directory {path}: {e}") from e
        return path

    @classmethod
    def write_text(cls, path: Union[str, Path], text: str) -> Path:
        path = Path(path)
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as e:
            raise ArtifactIOError(f"cannot write {path}: {e}") from e
        logger.info(f"Wrote {path}")
        return path

    @classmethod
    def write_csv(cls, path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        """Write rows under a header; newline-terminated, no index column."""
        path = Path(path)
        try:
            with open(path, "w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(header)
                writer.writerows(rows)
        except OSError as e:
            raise ArtifactIOError(f"cannot write {path}: {e}") from e
        logger.info(f"Wrote {path}")
        return path

    @classmethod
    def read_csv(cls, path: Union[str, Path]) -> List[Dict[str, str]]:
        try:
            with open(path, newline="", encoding="utf-8") as handle:
                return list(csv.DictReader(handle))
        except OSError as e:
            raise ArtifactIOError(f"cannot read {path}: {e}") from e

    @classmethod
    def write_json(cls, path: Union[str, Path], data: Mapping[str, Any]) -> Path:
        return cls.write_text(path, json.dumps(data, indent=2, sort_keys=True) + "\n")

    @classmethod
    def write_key_value(cls, path: Union[str, Path], values: Mapping[str, Any]) -> Path:
        return cls.write_text(path, "".join(f"{key}={value}\n" for key, value in values.items()))

    @classmethod
    def read_key_value(cls, path: Union[str, Path]) -> Dict[str, str]:
        """Parse a key=value file (comments and quoting as in .env files)."""
        if not os.path.isfile(path):
            raise ArtifactIOError(f"no such file: {path}")
        return {key: value or "" for key, value in dotenv_values(path).items()}

    # ------------------------------------------------------------------
    # bytes <-> F_q symbols
    # ------------------------------------------------------------------

    @classmethod
    def bits_per_symbol(cls, q: int) -> int:
        """floor(log2 q): the bits every F_q symbol can carry."""
        return q.bit_length() - 1

    @classmethod
    def bytes_to_symbols(cls, data: bytes, q: int, count: int) -> np.ndarray:
        """Pack bytes into ``count`` symbols of floor(log2 q) bits each, little-endian bit order, zero padded."""
        bits_per = cls.bits_per_symbol(q)
        if bits_per < 1:
            raise CodecError(f"field of order {q} carries no whole bit per symbol")
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
        if bits.size > count * bits_per:
            raise CodecError(f"{len(data)} bytes do not fit into {count} symbols of {bits_per} bits")
        padded = np.zeros(count * bits_per, dtype=np.int64)
        padded[:bits.size] = bits
        weights = np.int64(1) << np.arange(bits_per, dtype=np.int64)
        return padded.reshape(count, bits_per) @ weights

    @classmethod
    def symbols_to_bytes(cls, symbols: np.ndarray, q: int, length: int) -> bytes:
        """Inverse of bytes_to_symbols, truncated to ``length`` bytes."""
        bits_per = cls.bits_per_symbol(q)
        values = np.asarray(symbols, dtype=np.int64).reshape(-1)
        bits = (values[:, np.newaxis] >> np.arange(bits_per, dtype=np.int64)) & 1
        packed = np.packbits(bits.reshape(-1).astype(np.uint8), bitorder="little")
        if packed.size < length:
            raise CodecError(f"symbols hold {packed.size} bytes, {length} requested")
        return packed[:length].tobytes()

    @classmethod
    def bytes_to_file(cls, data: bytes, GF: type, delta: int, rows: int) -> Any:
        """A rows x delta file over F_q carrying ``data``."""
        symbols = cls.bytes_to_symbols(data, GF.order, rows * delta)
        return GF(symbols.reshape(rows, delta))

    @classmethod
    def file_to_bytes(cls, block: Any, length: int) -> bytes:
        return cls.symbols_to_bytes(block.view(np.ndarray), type(block).order, length)

    # ------------------------------------------------------------------
    # framed binary codec
    # ------------------------------------------------------------------

    @classmethod
    def symbol_width(cls, q: int) -> int:
        needed = max(1, ((q - 1).bit_length() + 7) // 8)
        for width in cls.SYMBOL_WIDTHS:
            if width >= needed:
                return width
        raise CodecError(f"symbols of GF({q}) need {needed} bytes; at most 8 are supported")

    @classmethod
    def encode_frame(cls, kind: FrameKind, array: Any, p: int, e: int, s: int = 1) -> bytes:
        """Serialize one F_q array (trailing axis of length s for F_{q^s} matrices)."""
        width = cls.symbol_width(p ** e)
        dims = tuple(int(d) for d in np.shape(array))
        header = _HEADER.pack(MAGIC, VERSION, int(kind), p, e, s, width, len(dims))
        body = np.asarray(array.view(np.ndarray) if hasattr(array, "view") else array) \
            .astype(f"<u{width}").tobytes()
        return header + struct.pack(f"<{len(dims)}I", *dims) + body

    @classmethod
    def decode_frame(cls, data: bytes, offset: int = 0) -> Tuple[Dict[str, Any], np.ndarray, int]:
        """Parse the frame at ``offset``; returns (header fields, symbol array, next offset)."""
        if len(data) - offset < _HEADER.size:
            raise CodecError("truncated frame header")
        magic, version, kind, p, e, s, width, ndim = _HEADER.unpack_from(data, offset)
        if magic != MAGIC:
            raise CodecError(f"bad magic {magic!r}")
        if version != VERSION:
            raise CodecError(f"unsupported frame version {version}")
        try:
            kind = FrameKind(kind)
        except ValueError as e:
            raise CodecError(f"unknown frame kind {kind}") from e
        if width not in cls.SYMBOL_WIDTHS:
            raise CodecError(f"invalid symbol width {width}")
        offset += _HEADER.size
        dims = struct.unpack_from(f"<{ndim}I", data, offset)
        offset += 4 * ndim
        size = int(np.prod(dims, dtype=np.int64)) * width
        if len(data) - offset < size:
            raise CodecError("truncated frame body")
        symbols = np.frombuffer(data, dtype=f"<u{width}", count=size // width, offset=offset).reshape(dims)
        if symbols.size and int(symbols.max()) >= p ** e:
            raise CodecError(f"symbol out of range for GF({p}^{e})")
        header = {"kind": kind, "p": p, "e": e, "s": s, "width": width, "dims": dims}
        return header, symbols.astype(np.int64), offset + size

    @classmethod
    def write_frames(cls, path: Union[str, Path], frames: Sequence[bytes]) -> Path:
        path = Path(path)
        try:
            path.write_bytes(b"".join(frames))
        except OSError as e:
            raise ArtifactIOError(f"cannot write {path}: {e}") from e
        logger.info(f"Wrote {len(frames)} frame(s) to {path}")
        return path

    @classmethod
    def read_frames(cls, path: Union[str, Path]) -> List[Tuple[Dict[str, Any], np.ndarray]]:
        try:
            data = Path(path).read_bytes()
        except OSError as e:
            raise ArtifactIOError(f"cannot read {path}: {e}") from e
        frames, offset = [], 0
        while offset < len(data):
            header, symbols, offset = cls.decode_frame(data, offset)
            frames.append((header, symbols))
        return frames
