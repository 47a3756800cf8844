"""Deterministic 64-bit SplitMix-style random number streams.

Training and data splitting use these streams instead of a library RNG so that
a (seed, stream index) pair reproduces bit-identical models on any platform or
in any reimplementation. Constants below are the widely used SplitMix64
increment (the 64-bit golden ratio) and the murmur-style finalizer constants.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finalizer: avalanche a 64-bit value."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX_A) & MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """SplitMix64 generator: state += GOLDEN_GAMMA, output = mix64(state)."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def next_float(self) -> float:
        """Uniform in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n) via the multiply-shift reduction."""
        if n <= 0:
            raise ValueError("n must be positive")
        return (self.next_u64() * n) >> 64

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle, iterating from the last index down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_indices(self, n: int, k: int) -> list[int]:
        """First k entries of a Fisher-Yates pass over range(n), as a list.

        Draws k distinct indices; order is the draw order (deterministic).
        """
        if not 0 <= k <= n:
            raise ValueError("need 0 <= k <= n")
        pool = list(range(n))
        for i in range(k):
            j = i + self.next_below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]


def stream(seed: int, index: int) -> SplitMix64:
    """Derive the index-th child stream of a root seed.

    The child seed is mix64(seed + (index + 1) * GOLDEN_GAMMA): distinct
    indices land in well separated states regardless of the root seed.
    """
    return SplitMix64(mix64((seed + (index + 1) * GOLDEN_GAMMA) & MASK64))
