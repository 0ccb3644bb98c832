"""Counter-based splitmix64 streams.

Element ``i`` of the stream for ``seed`` is ``mix(seed + (i + 1) * GAMMA)``,
which is exactly the sequence produced by repeatedly calling the classic
stateful splitmix64 generator seeded with ``seed``.
"""

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
MASK64 = (1 << 64) - 1


def splitmix64(seed: int, count: int, offset: int = 0) -> np.ndarray:
    index = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    z = np.uint64(seed & MASK64) + index * GAMMA
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def uniform01(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Doubles in [0, 1) from the top 53 bits of each draw."""
    return (splitmix64(seed, count, offset) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def rademacher(seed: int, count: int) -> np.ndarray:
    """+1/-1 with equal probability, taken from the top bit of each draw."""
    bits = (splitmix64(seed, count) >> np.uint64(63)).astype(np.float64)
    return 2.0 * bits - 1.0
