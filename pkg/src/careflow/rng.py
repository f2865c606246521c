"""Seeded, portable random source for the simulator.

SplitMix64 (Steele, Lea & Flood) with pure integer state, so streams are
identical across interpreters and platforms: no dependence on hash
randomization or on a library's distribution internals. Substreams are
derived by folding stream indices into the seed, which keeps every case's
draws independent of case order and of how many draws other cases consume.
"""

from __future__ import annotations

import math

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class Stream:
    """One SplitMix64 stream; extra constructor args select a substream."""

    __slots__ = ("_state",)

    def __init__(self, seed: int, *substream: int):
        state = seed & _MASK
        for part in substream:
            state = _mix((state + _GOLDEN * ((part & _MASK) + 1)) & _MASK)
        self._state = state

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        return _mix(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float) -> float:
        return lo + self.random() * (hi - lo)

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("n must be positive")
        return min(int(self.random() * n), n - 1)

    def bernoulli(self, p: float) -> bool:
        return self.random() < p

    def normal(self) -> float:
        """Standard normal via Box-Muller (cosine branch)."""
        u1 = self.random()
        while u1 <= 0.0:
            u1 = self.random()
        u2 = self.random()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def lognormal(self, mean: float, sigma: float) -> float:
        """Lognormal draw parameterized by its mean and log-space sigma."""
        if mean <= 0:
            raise ValueError("lognormal mean must be positive")
        mu = math.log(mean) - 0.5 * sigma * sigma
        return math.exp(mu + sigma * self.normal())

    def truncated_normal(self, center: float, spread: float, lo: float, hi: float) -> float:
        """Normal(center, spread) clipped to [lo, hi] by rejection.

        Falls back to a uniform draw if 64 rejections fail (degenerate bounds),
        so the draw count stays bounded and deterministic per call site.
        """
        if spread <= 0:
            return min(max(center, lo), hi)
        for _ in range(64):
            x = center + spread * self.normal()
            if lo <= x <= hi:
                return x
        return self.uniform(lo, hi)

    def pick_weighted(self, weights: list[float]) -> int:
        """Categorical draw; weights must be non-negative with a positive sum."""
        total = sum(weights)
        if total <= 0:
            raise ValueError("weights must sum to a positive value")
        u = self.random() * total
        acc = 0.0
        for index, weight in enumerate(weights):
            acc += weight
            if u < acc:
                return index
        return len(weights) - 1
