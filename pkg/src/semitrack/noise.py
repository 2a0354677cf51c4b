"""Seedable measurement-noise generator.

Uses the splitmix64 integer recurrence (64-bit state; Steele, Lea &
Flood's published constants) with Box-Muller Gaussian shaping.  The
algorithm is fully specified here so any implementation in any language
reproduces the same noise stream bit-for-bit from the same seed.
"""

from __future__ import annotations

import math

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """64-bit-state PRNG: uniform 64-bit words and doubles in [0, 1)."""

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_uint64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def next_double(self) -> float:
        # 53 high-quality bits mapped to [0, 1)
        return (self.next_uint64() >> 11) * 2.0 ** -53


class GaussianNoise:
    """Standard-normal stream via the Box-Muller transform.

    Generates pairs from two uniforms and caches the spare, so draws come
    in a deterministic order for a fixed seed.
    """

    def __init__(self, seed: int, std: float = 1.0):
        self._rng = SplitMix64(seed)
        self.std = float(std)
        self._spare = None

    def draw(self) -> float:
        if self._spare is not None:
            value, self._spare = self._spare, None
            return self.std * value
        # reject u1 == 0 to keep log finite
        u1 = 0.0
        while u1 == 0.0:
            u1 = self._rng.next_double()
        u2 = self._rng.next_double()
        radius = math.sqrt(-2.0 * math.log(u1))
        angle = 2.0 * math.pi * u2
        self._spare = radius * math.sin(angle)
        return self.std * radius * math.cos(angle)
