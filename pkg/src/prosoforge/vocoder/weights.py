"""Named parameter tensors and their binary container.

File layout (little-endian)::

    b"PFW1" | u32 entry count | per entry: u16 name length, UTF-8 name, tensor record
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple, Union

import numpy as np

from ..errors import FormatError, ValidationError
from ..tensorfile import decode_tensor, encode_tensor
from .rng import uniform01

MAGIC = b"PFW1"


@dataclass(frozen=True)
class ParamSpec:
    name: str
    shape: Tuple[int, ...]
    fan_in: int = 0
    fan_out: int = 0
    is_bias: bool = False

    @property
    def bound(self) -> float:
        if self.is_bias:
            return 0.0
        return float(np.sqrt(6.0 / (self.fan_in + self.fan_out)))


class WeightStore:
    """Immutable, ordered mapping of parameter name to float32 tensor."""

    def __init__(self, tensors: Dict[str, np.ndarray], seed: Optional[int] = None):
        store = {}
        for name, value in tensors.items():
            arr = np.array(value, dtype=np.float32)
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"tensor {name!r} has non-finite values")
            arr.flags.writeable = False
            store[name] = arr
        self._tensors = store
        self.seed = seed

    def __getitem__(self, name: str) -> np.ndarray:
        return self._tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __len__(self) -> int:
        return len(self._tensors)

    def __iter__(self):
        return iter(self._tensors)

    def items(self):
        return self._tensors.items()

    def get(self, name: str) -> np.ndarray:
        """Parameter as float64 for computation."""
        return self._tensors[name].astype(np.float64)

    @property
    def n_params(self) -> int:
        return sum(t.size for t in self._tensors.values())

    def flat(self) -> np.ndarray:
        return np.concatenate([t.reshape(-1).astype(np.float64) for t in self._tensors.values()])

    def from_flat(self, vector: np.ndarray) -> "WeightStore":
        out, pos = {}, 0
        for name, t in self._tensors.items():
            out[name] = np.asarray(vector[pos:pos + t.size]).reshape(t.shape)
            pos += t.size
        if pos != len(vector):
            raise ValidationError(f"vector has {len(vector)} values, store holds {pos}")
        return WeightStore(out, self.seed)

    def zeros_like(self) -> "WeightStore":
        return WeightStore({k: np.zeros_like(v) for k, v in self._tensors.items()}, self.seed)

    def check(self, specs: Iterable[ParamSpec]) -> None:
        specs = list(specs)
        expected = {s.name: s.shape for s in specs}
        missing = sorted(set(expected) - set(self._tensors))
        if missing:
            raise ValidationError(f"weights missing tensors: {missing[:5]}")
        for name, shape in expected.items():
            if self._tensors[name].shape != shape:
                raise ValidationError(f"tensor {name!r} has shape {self._tensors[name].shape}, config needs {shape}")

    def equals(self, other: "WeightStore") -> bool:
        return list(self._tensors) == list(other._tensors) and all(
            np.array_equal(self._tensors[k], other._tensors[k]) for k in self._tensors
        )

    # -- serialization -----------------------------------------------------

    def to_bytes(self) -> bytes:
        parts = [MAGIC, struct.pack("<I", len(self._tensors))]
        for name, t in self._tensors.items():
            raw = name.encode("utf-8")
            parts.append(struct.pack("<H", len(raw)) + raw)
            parts.append(encode_tensor(t))
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, raw: bytes) -> "WeightStore":
        stream = io.BytesIO(raw)
        if stream.read(4) != MAGIC:
            raise FormatError("bad weight-store magic")
        head = stream.read(4)
        if len(head) != 4:
            raise FormatError("truncated weight-store header")
        (count,) = struct.unpack("<I", head)
        tensors = {}
        for _ in range(count):
            nlen = stream.read(2)
            if len(nlen) != 2:
                raise FormatError("truncated weight-store entry")
            (n,) = struct.unpack("<H", nlen)
            name = stream.read(n)
            if len(name) != n:
                raise FormatError("truncated tensor name")
            key = name.decode("utf-8")
            if key in tensors:
                raise FormatError(f"duplicate tensor name {key!r}")
            tensors[key] = decode_tensor(stream)
        if stream.read(1):
            raise FormatError("trailing bytes after last weight-store entry")
        return cls(tensors)

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path: Union[str, Path]) -> "WeightStore":
        return cls.from_bytes(Path(path).read_bytes())


def init_from_specs(specs: Iterable[ParamSpec], seed: int) -> WeightStore:
    """Glorot-uniform weights drawn from one splitmix64 stream; biases are zero.

    Tensors consume the stream in declaration order.
    """
    tensors = {}
    offset = 0
    for spec in specs:
        if spec.name in tensors:
            raise ValidationError(f"duplicate parameter name {spec.name!r}")
        size = int(np.prod(spec.shape))
        if spec.is_bias:
            tensors[spec.name] = np.zeros(spec.shape)
            continue
        u = uniform01(seed, size, offset)
        offset += size
        values = (spec.bound * (2.0 * u - 1.0)).reshape(spec.shape).astype(np.float32)
        # float32 rounding may nudge a value just past the bound
        tensors[spec.name] = np.clip(values, -np.float32(spec.bound), np.float32(spec.bound))
    return WeightStore(tensors, seed)
