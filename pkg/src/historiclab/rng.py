"""SplitMix64, the seedable 64-bit generator used for all sampling.

The generator follows Vigna's published reference algorithm bit for bit, and
doubles are formed from the top 53 bits (``(z >> 11) * 2**-53``), so any
implementation of the same recipe reproduces the same samples from a seed.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Stateful SplitMix64 stream.

    >>> g = SplitMix64(0)
    >>> hex(g.next_u64())
    '0xe220a8397b1dcdaf'
    """

    def __init__(self, seed: int) -> None:
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        return _mix(self.state)

    def random(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def u64_array(self, n: int) -> np.ndarray:
        """Next ``n`` outputs as a ``uint64`` array (advances the state)."""
        steps = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * np.uint64(_GOLDEN)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + n * _GOLDEN) & _MASK
        return z

    def random_array(self, n: int) -> np.ndarray:
        """Next ``n`` doubles in ``[0, 1)``."""
        return (self.u64_array(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def integers(self, n: int, high: int) -> np.ndarray:
        """``n`` integers in ``[0, high)`` by multiply-shift on the top 53 bits."""
        return np.floor(self.random_array(n) * high).astype(np.int64)
