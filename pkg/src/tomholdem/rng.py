"""Portable 64-bit randomness: SplitMix64 plus a seed-mixing hash.

Every random decision in the package (shuffles, scripted policies, bootstrap
resampling) draws from this generator so that a given seed produces the same
stream in any language that implements SplitMix64.

Reference stream for seed 0 (first three outputs)::

    0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 output finalizer (a bijection on 64-bit integers)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & MASK64
    return h


def derive_seed(*parts: int | str) -> int:
    """Hash an ordered tuple of ints/strings into one 64-bit seed.

    ``h = mix64(h ^ (part + GOLDEN))`` folded left to right, starting from
    ``GOLDEN``; strings are first reduced with FNV-1a 64.
    """
    h = GOLDEN
    for part in parts:
        if isinstance(part, str):
            part = fnv1a64(part)
        h = mix64(h ^ ((int(part) + GOLDEN) & MASK64))
    return h


class SplitMix64:
    """Sequential SplitMix64 generator."""

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection (unbiased)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = MASK64 - (MASK64 + 1) % n
        while True:
            x = self.next_u64()
            if x <= limit:
                return x % n

    def random(self) -> float:
        """Uniform float in ``[0, 1)`` from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, swapping from the end of the list."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def bulk_u64(self, count: int) -> np.ndarray:
        """Next ``count`` outputs as a uint64 array (same stream as next_u64)."""
        steps = np.arange(1, count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * np.uint64(GOLDEN)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + count * GOLDEN) & MASK64
        return z

    def bulk_indices(self, count: int, n: int) -> np.ndarray:
        """``count`` indices in ``[0, n)`` via modulo reduction.

        The modulo bias is below ``n / 2**64`` and is ignored here; use
        :meth:`below` where exact uniformity matters.
        """
        return (self.bulk_u64(count) % np.uint64(n)).astype(np.int64)
