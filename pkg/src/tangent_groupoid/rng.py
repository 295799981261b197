"""Seeded 64-bit linear congruential generator for reproducible sweeps.

``state <- state * 6364136223846793005 + 1442695040888963407 (mod 2**64)``;
a uniform double in ``[0, 1)`` takes the top 53 bits of the new state.
The first draw after seeding already advances the state once.
"""
from __future__ import annotations

MULTIPLIER = 6364136223846793005
INCREMENT = 1442695040888963407
MASK = (1 << 64) - 1


class Lcg64:
    def __init__(self, seed: int = 0):
        self.state = int(seed) & MASK

    def next_u64(self) -> int:
        self.state = (self.state * MULTIPLIER + INCREMENT) & MASK
        return self.state

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randint(self, lo: int, hi: int) -> int:
        """Integer in ``[lo, hi]`` (inclusive)."""
        span = hi - lo + 1
        return lo + (self.next_u64() >> 11) % span
