"""PCG-XSH-RR 64/32 generator with numpy block generation.

The 64-bit LCG underneath PCG is advanced in blocks: the states
``s_1 .. s_n`` are produced by repeated doubling (``s[m:2m] = A_m * s[:m] + C_m``)
so drawing a few million numbers costs O(log n) numpy passes instead of a
Python loop.  Output is bit-identical to the reference sequential algorithm.
"""

from __future__ import annotations

import numpy as np

MULTIPLIER = 6364136223846793005
_MASK64 = (1 << 64) - 1
_U64 = np.uint64


def _output(old: np.ndarray) -> np.ndarray:
    """XSH-RR output permutation applied to the pre-advance states."""
    xorshifted = (((old >> _U64(18)) ^ old) >> _U64(27)) & _U64(0xFFFFFFFF)
    rot = old >> _U64(59)
    left = (xorshifted << ((_U64(32) - rot) & _U64(31))) & _U64(0xFFFFFFFF)
    return ((xorshifted >> rot) | left).astype(np.uint32)


class Pcg32:
    """Seedable 32-bit generator; identical (seed, stream) gives identical output."""

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream = int(stream) & _MASK64
        self._inc = ((self.stream << 1) | 1) & _MASK64
        self._state = 0
        self._step_scalar()
        self._state = (self._state + self.seed) & _MASK64
        self._step_scalar()

    def _step_scalar(self) -> None:
        self._state = (self._state * MULTIPLIER + self._inc) & _MASK64

    def next_u32(self) -> int:
        old = self._state
        self._step_scalar()
        return int(_output(np.array([old], dtype=np.uint64))[0])

    def u32(self, n: int) -> np.ndarray:
        """Next ``n`` raw 32-bit outputs."""
        n = int(n)
        if n < 0:
            raise ValueError("n must be non-negative")
        if n == 0:
            return np.empty(0, dtype=np.uint32)
        states = np.empty(n, dtype=np.uint64)
        states[0] = self._state
        mult, inc = MULTIPLIER, self._inc
        filled = 1
        while filled < n:
            take = min(filled, n - filled)
            # uint64 arithmetic wraps modulo 2**64
            states[filled:filled + take] = states[:take] * _U64(mult) + _U64(inc)
            inc = (inc * mult + inc) & _MASK64
            mult = (mult * mult) & _MASK64
            filled += take
        last = int(states[-1])
        self._state = (last * MULTIPLIER + self._inc) & _MASK64
        return _output(states)

    def random(self, n: int) -> np.ndarray:
        """Uniform doubles in [0, 1) with 53 random bits each."""
        raw = self.u32(2 * int(n)).astype(np.uint64)
        hi = raw[0::2] >> _U64(5)
        lo = raw[1::2] >> _U64(6)
        return (hi.astype(np.float64) * 67108864.0 + lo.astype(np.float64)) / 9007199254740992.0

    def uniform(self, low: float, high: float, size) -> np.ndarray:
        shape = (size,) if np.isscalar(size) else tuple(size)
        count = int(np.prod(shape, dtype=np.int64))
        return (low + (high - low) * self.random(count)).reshape(shape)

    def normal(self, size, scale: float = 1.0) -> np.ndarray:
        """Box-Muller normals; both outputs of each pair are used."""
        shape = (size,) if np.isscalar(size) else tuple(size)
        count = int(np.prod(shape, dtype=np.int64))
        pairs = (count + 1) // 2
        u = self.random(2 * pairs)
        radius = np.sqrt(-2.0 * np.log1p(-u[0::2]))
        angle = 2.0 * np.pi * u[1::2]
        z = np.empty(2 * pairs)
        z[0::2] = radius * np.cos(angle)
        z[1::2] = radius * np.sin(angle)
        return (scale * z[:count]).reshape(shape)

    def permutation(self, n: int) -> np.ndarray:
        """Uniform random permutation of ``range(n)`` (sort by random keys)."""
        return np.argsort(self.random(n), kind="stable")

    def choice_signs(self, size) -> np.ndarray:
        """Independent fair +-1 draws."""
        shape = (size,) if np.isscalar(size) else tuple(size)
        count = int(np.prod(shape, dtype=np.int64))
        bits = self.u32(count) >> np.uint32(31)
        return np.where(bits == 1, 1.0, -1.0).reshape(shape)


def derive(seed: int, stream: int) -> Pcg32:
    """Independent stream for a (global seed, purpose/worker index) pair."""
    return Pcg32(seed, stream)
