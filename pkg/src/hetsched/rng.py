"""Seedable, portable 64-bit PRNG (splitmix64).

Used for task generation and sporadic arrival jitter so that every run is
reproducible from a single integer seed, independent of Python version or
platform.  Streams derived from (seed, index) are independent, which makes
batch generation splittable: batch i can be regenerated without drawing
batches 0..i-1.
"""

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15

GENERATOR_NAME = "splitmix64"


def _mix(x: int) -> int:
    x &= _MASK
    z = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


def derive_stream_seed(seed: int, index: int) -> int:
    """Seed for the index-th substream of `seed`."""
    return _mix((seed + (index + 1) * _GAMMA) & _MASK)


class SplitMix64:
    """splitmix64 sequence; next_u64 steps the state by the golden gamma."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return _mix(self._state)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased via rejection."""
        if n <= 0:
            raise ValueError(f"need a positive bound, got {n}")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], inclusive."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.below(hi - lo + 1)
