"""Deterministic random number generation.

All stochastic choices in this package (dataset synthesis, augmentation,
weight init) flow through a SplitMix64 generator with a Box-Muller normal
transform, so datasets and models are bit-reproducible across platforms
and independent of numpy's own generator versioning.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1FE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from a sequence of ints/strings.

    Used to give every (dataset, class, sample, op) its own stream so
    results do not depend on generation order or thread scheduling.
    """
    h = 0x8E3C5D1F2B9A7E41
    for part in parts:
        if isinstance(part, str):
            for byte in part.encode("utf-8"):
                h = _mix((h + byte + _GOLDEN) & _MASK)
        else:
            h = _mix((h + (int(part) & _MASK) + _GOLDEN) & _MASK)
    return h


class SplitMix64:
    """Counter-based SplitMix64 stream with vectorized draws."""

    def __init__(self, seed: int):
        self._seed = int(seed) & _MASK
        self._counter = 0

    def next_u64(self) -> int:
        self._counter += 1
        return _mix((self._seed + self._counter * _GOLDEN) & _MASK)

    def _next_block(self, n: int) -> np.ndarray:
        start = self._counter + 1
        self._counter += n
        idx = np.arange(start, start + n, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self._seed) + idx * np.uint64(_GOLDEN)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
            z = z ^ (z >> np.uint64(31))
        return z

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        u = (self.next_u64() >> 11) * 2.0 ** -53
        return lo + (hi - lo) * u

    def uniform_array(self, n: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        u = (self._next_block(n) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
        return lo + (hi - lo) * u

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n). Bias is < n / 2^64, negligible here."""
        return self.next_u64() % n

    def normal_array(self, n: int, sigma: float = 1.0) -> np.ndarray:
        """Box-Muller pairs; u1 mapped into (0, 1] to keep the log finite."""
        m = (n + 1) // 2
        u1 = ((self._next_block(m) >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0 ** -53
        u2 = (self._next_block(m) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])
        return sigma * z[:n]

    def shuffle(self, arr: np.ndarray) -> None:
        """In-place Fisher-Yates over the first axis."""
        for i in range(len(arr) - 1, 0, -1):
            j = self.randint(i + 1)
            arr[[i, j]] = arr[[j, i]]
