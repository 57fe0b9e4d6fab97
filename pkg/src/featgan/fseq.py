"""FSEQ binary feature-sequence files.

Layout: magic "FSEQ" (4 bytes), version u32 LE = 1, frame count T u32 LE,
dimension D u32 LE, then T*D float32 LE values row-major (frame-major).
Round-trips are bit-exact.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from featgan.errors import (BadMagicError, HeaderOverflowError,
                            TruncatedFileError, VersionError)

MAGIC = b"FSEQ"
VERSION = 1
HEADER_SIZE = 16

# T*D guard against corrupt headers (1 GiB of float32 payload).
_MAX_ELEMS = 1 << 28


def write_fseq(values: np.ndarray, path) -> None:
    """Write a T x D float32 matrix; values are cast to float32 LE."""
    values = np.asarray(values)
    if values.ndim != 2:
        raise ValueError(f"feature sequence must be 2-d, got shape {values.shape}")
    frames, dims = values.shape
    payload = np.ascontiguousarray(values, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", VERSION, frames, dims))
        fh.write(payload)


def read_fseq(path) -> np.ndarray:
    """Read an FSEQ file back as a T x D float32 array."""
    data = Path(path).read_bytes()
    if len(data) < HEADER_SIZE:
        if data[:4] != MAGIC and len(data) >= 4:
            raise BadMagicError(f"{path}: bad magic {data[:4]!r}")
        raise TruncatedFileError(f"{path}: file shorter than FSEQ header")
    if data[:4] != MAGIC:
        raise BadMagicError(f"{path}: bad magic {data[:4]!r}")
    version, frames, dims = struct.unpack("<III", data[4:HEADER_SIZE])
    if version != VERSION:
        raise VersionError(f"{path}: unsupported FSEQ version {version}")
    if frames * dims > _MAX_ELEMS:
        raise HeaderOverflowError(
            f"{path}: header declares {frames}x{dims} values, over sanity limit")
    expected = HEADER_SIZE + 4 * frames * dims
    if len(data) < expected:
        raise TruncatedFileError(
            f"{path}: header declares {frames}x{dims} values "
            f"({expected} bytes) but file has {len(data)}")
    values = np.frombuffer(data[HEADER_SIZE:expected], dtype="<f4")
    return values.reshape(frames, dims).copy()
