"""Deterministic, language-portable pseudo-random streams.

Every random fixture in this package (synthetic token grids, scorer weights,
Gumbel noise) comes from the same fully specified construction so that two
runs, or two implementations, produce bit-identical values:

  state_i = SplitMix64 stream over ``seed`` (i-th output)
  value_i = first output of an xorshift64* generator seeded with state_i

Because state_i depends only on (seed, i), the whole stream is counter-based
and vectorizes over numpy uint64 arrays.
"""

from __future__ import annotations

import numpy as np

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_STAR = np.uint64(0x2545F4914F6CDD1D)

# 2**-53; 53 random bits give the finest uniform grid a float64 resolves.
_U53 = float(2.0**-53)


def _splitmix64(seed: int, start: int, count: int) -> np.ndarray:
    """States start+1 .. start+count of the SplitMix64 stream for ``seed``."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    z = (np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * _GOLDEN) & _MASK64
    z = ((z ^ (z >> np.uint64(30))) * _MIX1) & _MASK64
    z = ((z ^ (z >> np.uint64(27))) * _MIX2) & _MASK64
    return z ^ (z >> np.uint64(31))


def _xorshift64star(x: np.ndarray) -> np.ndarray:
    # xorshift64* needs a nonzero state; remap the (probability 2**-64) zero.
    x = np.where(x == 0, _GOLDEN, x)
    x = x ^ (x >> np.uint64(12))
    x = x ^ (x << np.uint64(25)) & _MASK64
    x = x ^ (x >> np.uint64(27))
    return (x * _STAR) & _MASK64


def bits64(seed: int, count: int, start: int = 0) -> np.ndarray:
    """``count`` deterministic 64-bit words for (seed, start..start+count)."""
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    return _xorshift64star(_splitmix64(seed, start, count))


def uniform_signed(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Uniform float64 values in [-1, 1)."""
    u = (bits64(seed, count, start) >> np.uint64(11)).astype(np.float64) * _U53
    return 2.0 * u - 1.0


def uniform_open(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Uniform float64 values in the open interval (0, 1); log-safe."""
    w = (bits64(seed, count, start) >> np.uint64(11)).astype(np.float64)
    return (w + 0.5) * _U53


def gumbel(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Standard Gumbel noise g = -log(-log(u)), u uniform in (0, 1)."""
    return -np.log(-np.log(uniform_open(seed, count, start)))
