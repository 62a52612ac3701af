"""xoshiro256** seeded through splitmix64.

Pure Python so that a (seed, index) pair yields the same stream on every
platform. Each sample gets its own generator, which keeps Monte-Carlo
results independent of how samples are split across workers.
"""
from __future__ import annotations

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One splitmix64 finalizer step applied to ``x + GOLDEN``."""
    z = (x + GOLDEN) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK


class Xoshiro256ss:
    __slots__ = ("s",)

    def __init__(self, seed: int):
        # the standard splitmix64 stream: outputs k = 1..4 from state ``seed``
        s = [splitmix64((seed + k * GOLDEN) & MASK) for k in range(4)]
        if not any(s):  # the all-zero state is a fixed point
            s[0] = 1
        self.s = s

    def next64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & MASK, 7) * 9) & MASK
        t = (s[1] << 17) & MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result


def sample_seed(seed: int, index: int) -> int:
    """Seed for sample ``index`` under master ``seed``."""
    return splitmix64((seed & MASK) ^ splitmix64(index & MASK))


def sample_rng(seed: int, index: int) -> Xoshiro256ss:
    return Xoshiro256ss(sample_seed(seed, index))
