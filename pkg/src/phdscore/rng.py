"""Portable deterministic random numbers for plans and simulations.

Everything downstream of a seed must be byte-stable across platforms,
Python versions and worker counts, so this module implements splitmix64
(Steele, Lea & Flood 2014) instead of relying on `random`'s internals.

The generator is counter-based: draw t of a stream is

    mix64((seed + (t + 1) * GOLDEN_GAMMA) mod 2^64)

a pure function of (seed, t). That makes any draw addressable without
generating its predecessors, so work can be split across threads in
chunks while producing exactly the sequential output.

Unit-interval floats take the top 53 bits of a draw, giving uniform
values in [0, 1) at full double precision.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_INV_2_53 = 2.0 ** -53


def mix64(value: int) -> int:
    """The splitmix64 finalizer: a 64-bit avalanche mix."""
    z = value & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def draw_at(seed: int, index: int) -> int:
    """The index-th 64-bit draw of the stream started at seed."""
    return mix64((seed + (index + 1) * _GOLDEN_GAMMA) & _MASK64)


def unit_at(seed: int, index: int) -> float:
    """The index-th uniform float in [0, 1) of the stream."""
    return (draw_at(seed, index) >> 11) * _INV_2_53


def fnv1a64(text: str) -> int:
    """FNV-1a 64-bit hash of a UTF-8 string (stable across runs)."""
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


def derive_seed(seed: int, label: str) -> int:
    """A per-label child seed, e.g. one independent stream per utterance."""
    return mix64((seed ^ fnv1a64(label)) & _MASK64)


class Stream:
    """Sequential view over the counter-based stream for one seed."""

    def __init__(self, seed: int) -> None:
        self.seed = seed & _MASK64
        self._index = 0

    def next_unit(self) -> float:
        value = unit_at(self.seed, self._index)
        self._index += 1
        return value

    def next_int(self, bound: int) -> int:
        """Uniform integer in [0, bound) via the unit draw; bound >= 1."""
        value = int(self.next_unit() * bound)
        return bound - 1 if value >= bound else value
