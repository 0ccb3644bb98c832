"""Binary tensor container.

Layout (all little-endian)::

    b"PFT1" | u32 rank | rank x u64 dims | prod(dims) x f32 row-major payload
"""

from __future__ import annotations

import io
import struct
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np

from .errors import FormatError, ValidationError

MAGIC = b"PFT1"


def encode_tensor(array: np.ndarray) -> bytes:
    array = np.asarray(array)
    if array.ndim == 0 or 0 in array.shape:
        raise ValidationError(f"tensor dims must be nonzero, got {array.shape}")
    header = MAGIC + struct.pack("<I", array.ndim) + struct.pack(f"<{array.ndim}Q", *array.shape)
    return header + np.ascontiguousarray(array, dtype="<f4").tobytes()


def decode_tensor(stream: BinaryIO) -> np.ndarray:
    """Read one tensor record from ``stream``, leaving it positioned just after."""
    magic = stream.read(4)
    if magic != MAGIC:
        raise FormatError(f"bad tensor magic {magic!r}")
    head = stream.read(4)
    if len(head) != 4:
        raise FormatError("truncated tensor header")
    (rank,) = struct.unpack("<I", head)
    raw_dims = stream.read(8 * rank)
    if len(raw_dims) != 8 * rank:
        raise FormatError("truncated tensor dims")
    dims = struct.unpack(f"<{rank}Q", raw_dims)
    if rank == 0 or 0 in dims:
        raise FormatError(f"invalid tensor dims {dims}")
    n_bytes = 4 * int(np.prod(dims, dtype=np.int64))
    payload = stream.read(n_bytes)
    if len(payload) != n_bytes:
        raise FormatError(f"payload holds {len(payload)} bytes, dims {dims} need {n_bytes}")
    return np.frombuffer(payload, dtype="<f4").reshape(dims).copy()


def write_tensor(path: Union[str, Path], array: np.ndarray) -> None:
    Path(path).write_bytes(encode_tensor(array))


def read_tensor(path: Union[str, Path]) -> np.ndarray:
    raw = Path(path).read_bytes()
    stream = io.BytesIO(raw)
    array = decode_tensor(stream)
    if stream.tell() != len(raw):
        raise FormatError(f"{path}: {len(raw) - stream.tell()} trailing bytes after payload")
    return array
