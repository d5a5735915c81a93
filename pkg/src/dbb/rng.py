"""Deterministic counter-based random streams.

A stream is a 64-bit key plus a draw counter; the k-th value of a stream is a
pure function of ``(key, k)``. Any draw can therefore be evaluated without
touching the rest of the stream, which makes parallel consumers reproducible
as long as they agree on keys and counter layout. Keys are derived by folding
integers or short ASCII tags into a parent key, one fold per path component,
so independent streams (per trajectory, per replication, per epoch) never
share draws.

The mixer is the splitmix64 finalizer: integer-only, cheap to vectorize with
numpy, and trivial to inline inside compiled kernels. Uniforms are built from
the top 53 bits, so the float construction is exact and platform-independent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
_INV_2_53 = 2.0 ** -53

# numpy-typed copies for the vectorized path
_U_GOLDEN = np.uint64(GOLDEN)
_U_MIX_A = np.uint64(_MIX_A)
_U_MIX_B = np.uint64(_MIX_B)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX_A) & MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & MASK64
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 finalizer over a uint64 array."""
    z = (z ^ (z >> _U30)) * _U_MIX_A
    z = (z ^ (z >> _U27)) * _U_MIX_B
    return z ^ (z >> _U31)


def _tag_to_int(tag: str) -> int:
    data = tag.encode("ascii")
    acc = len(data)
    for i in range(0, len(data), 8):
        acc = mix64((acc + GOLDEN) ^ int.from_bytes(data[i : i + 8], "little"))
    return acc


def fold_in(key: int, data: int | str) -> int:
    """Derive a child key from ``key`` and one path component."""
    if isinstance(data, str):
        data = _tag_to_int(data)
    return mix64(((key + GOLDEN) & MASK64) ^ mix64(data))


def derive_key(seed: int, *path: int | str) -> int:
    """Key for the stream identified by ``seed`` and a path of components."""
    key = mix64(seed & MASK64)
    for component in path:
        key = fold_in(key, component)
    return key


def fold_in_array(key: int, data: np.ndarray) -> np.ndarray:
    """Vectorized ``fold_in`` over an array of integer path components."""
    mixed = mix64_array(data.astype(np.uint64))
    return mix64_array(np.uint64((key + GOLDEN) & MASK64) ^ mixed)


def random_u64(key: int, counter: int) -> int:
    return mix64((key + (counter + 1) * GOLDEN) & MASK64)


def u64_to_uniform(value: int) -> float:
    return (value >> 11) * _INV_2_53


def uniforms_from_key(key: int, start: int, count: int) -> np.ndarray:
    """Values ``start .. start+count-1`` of the stream ``key``, as floats in [0, 1)."""
    counters = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    values = mix64_array(np.uint64(key) + counters * _U_GOLDEN)
    return (values >> _U11).astype(np.float64) * _INV_2_53


@dataclass
class Stream:
    """Stateful cursor over one counter-based stream.

    Splitting (``child``) derives an unrelated stream; advancing the cursor
    only moves ``counter``. Equal (key, counter) pairs always produce equal
    draws, on any platform and under any scheduling.
    """

    key: int
    counter: int = 0

    @classmethod
    def from_seed(cls, seed: int, *path: int | str) -> "Stream":
        return cls(key=derive_key(seed, *path))

    def child(self, *path: int | str) -> "Stream":
        key = self.key
        for component in path:
            key = fold_in(key, component)
        return Stream(key=key)

    def next_uniform(self) -> float:
        value = random_u64(self.key, self.counter)
        self.counter += 1
        return u64_to_uniform(value)

    def uniforms(self, count: int) -> np.ndarray:
        out = uniforms_from_key(self.key, self.counter, count)
        self.counter += count
        return out

    def bernoulli(self, p: float, count: int) -> np.ndarray:
        """``count`` draws in {0, 1} with success probability ``p``."""
        return (self.uniforms(count) < p).astype(np.int64)

    def next_normal(self) -> float:
        """Standard normal draw via Box-Muller (consumes two uniforms)."""
        v1 = random_u64(self.key, self.counter)
        v2 = random_u64(self.key, self.counter + 1)
        self.counter += 2
        u1 = ((v1 >> 11) + 1) * _INV_2_53  # in (0, 1], keeps log finite
        u2 = (v2 >> 11) * _INV_2_53
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def randint_below(self, bound: int) -> int:
        """Integer in [0, bound) for shuffles and categorical fallbacks."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return min(int(self.next_uniform() * bound), bound - 1)
