"""Counter-based splittable random number streams.

Every stochastic component of the package draws from an :class:`RngStream`,
a thin deterministic wrapper around the Philox 4x64 counter-based bit
generator.  A stream is addressed by a 64-bit seed plus an arbitrary path of
identifiers (integers or strings); the path is folded into the 128-bit Philox
key with a SplitMix64 absorption, so independently created streams with
different paths are statistically independent and a given
``(seed, path, draw index)`` triple always yields the same value.

The integer-to-float mapping and the normal sampler are pinned so that the
draw sequences are portable across re-implementations of the same contract:

* uniforms map a raw 64-bit word to ``(raw >> 11) * 2**-53`` in ``[0, 1)``
  (53-bit mantissa division);
* normals use the Box-Muller transform on pairs of uniforms, with
  ``u1`` shifted into ``(0, 1]`` to avoid ``log(0)``; each call consumes an
  even number of raw words and discards the spare half-pair for odd sizes;
* Bernoulli and integer draws consume exactly one uniform each
  (``randint`` maps ``u`` to ``floor(u * n)`` clipped to ``n - 1``).
"""

from __future__ import annotations

import numpy as np

__all__ = ["RngStream", "substream_key"]

_MASK64 = (1 << 64) - 1
_BUFFER_SIZE = 1024


def _splitmix64(state: int) -> tuple[int, int]:
    """Advance a SplitMix64 state and return ``(new_state, output word)``."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, (z ^ (z >> 31)) & _MASK64


def _id_words(ident: int | str) -> list[int]:
    """Encode a path identifier as a list of 64-bit words."""
    if isinstance(ident, bool):  # bool is an int subclass; be explicit
        return [int(ident)]
    if isinstance(ident, (int, np.integer)):
        return [int(ident) & _MASK64]
    if isinstance(ident, str):
        data = ident.encode("utf-8")
        words = [len(data) & _MASK64]
        for i in range(0, len(data), 8):
            words.append(int.from_bytes(data[i : i + 8], "little"))
        return words
    raise TypeError(f"stream path identifiers must be int or str, got {type(ident)!r}")


def substream_key(seed: int, *path: int | str) -> tuple[int, int]:
    """Derive the 128-bit Philox key for ``(seed, path)``.

    The seed and each path identifier are absorbed into a SplitMix64 state in
    order; the two squeezed outputs form the key.  Distinct paths yield
    distinct keys except with negligible (2^-64) collision probability.
    """
    state = int(seed) & _MASK64
    for ident in path:
        for word in _id_words(ident):
            state, out = _splitmix64(state ^ word)
            state ^= out
    state, k0 = _splitmix64(state)
    state, k1 = _splitmix64(state)
    return k0, k1


class RngStream:
    """A deterministic substream addressed by ``(seed, *path)``.

    Draws are sequential within a stream; the per-call consumption of raw
    64-bit words is documented in the module docstring so a fixed call
    sequence pins the entire output sequence.
    """

    def __init__(self, seed: int, *path: int | str):
        self.seed = int(seed) & _MASK64
        self.path = path
        key = substream_key(seed, *path)
        self._bitgen = np.random.Philox(key=np.array(key, dtype=np.uint64))
        self._buffer = np.empty(0, dtype=np.uint64)
        self._pos = 0

    # -- raw word supply ----------------------------------------------------
    def _raw(self, count: int) -> np.ndarray:
        """Return the next ``count`` raw 64-bit words."""
        available = self._buffer.shape[0] - self._pos
        if count <= available:
            out = self._buffer[self._pos : self._pos + count]
            self._pos += count
            return out
        parts = [self._buffer[self._pos :]]
        needed = count - available
        refill = max(_BUFFER_SIZE, needed)
        self._buffer = self._bitgen.random_raw(refill)
        parts.append(self._buffer[:needed])
        self._pos = needed
        return np.concatenate(parts)

    def _next_uniform(self) -> float:
        """One uniform on [0, 1): the scalar fast path (same word consumption)."""
        if self._pos >= self._buffer.shape[0]:
            self._buffer = self._bitgen.random_raw(_BUFFER_SIZE)
            self._pos = 0
        word = int(self._buffer[self._pos])
        self._pos += 1
        return (word >> 11) * 2.0**-53

    # -- distributions ------------------------------------------------------
    def uniform(self, size=None, low: float = 0.0, high: float = 1.0):
        """Uniform draws on ``[low, high)`` via 53-bit mantissa division."""
        if size is None:
            return low + (high - low) * self._next_uniform()
        count = int(np.prod(size))
        raw = self._raw(count)
        u = (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53
        out = low + (high - low) * u
        return out.reshape(size)

    def normal(self, size=None, loc: float = 0.0, scale: float = 1.0):
        """Gaussian draws via Box-Muller on pairs of uniforms."""
        scalar = size is None
        count = 1 if scalar else int(np.prod(size))
        pairs = (count + 1) // 2
        raw = self._raw(2 * pairs)
        u = (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53
        u1 = u[0::2] + 2.0**-53  # shift into (0, 1]
        u2 = u[1::2]
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.empty(2 * pairs)
        z[0::2] = r * np.cos(theta)
        z[1::2] = r * np.sin(theta)
        out = loc + scale * z[:count]
        if scalar:
            return float(out[0])
        return out.reshape(size)

    def bernoulli(self, p, size=None):
        """0/1 draws; ``p`` may be a scalar or an array matching ``size``."""
        scalar = size is None
        count = 1 if scalar else int(np.prod(size))
        u = self.uniform(size=(count,))
        p_arr = np.asarray(p, dtype=np.float64)
        thresholds = p_arr.reshape(count) if p_arr.ndim else p_arr
        out = (u < thresholds).astype(np.int64)
        if scalar:
            return int(out[0])
        return out.reshape(size)

    def randint(self, n: int, size=None):
        """Integer draws on ``{0, ..., n-1}`` (one uniform each)."""
        if n < 1:
            raise ValueError("randint requires n >= 1")
        if size is None:
            return min(int(self._next_uniform() * n), n - 1)
        count = int(np.prod(size))
        u = self.uniform(size=(count,))
        out = np.minimum((u * n).astype(np.int64), n - 1)
        return out.reshape(size)

    def coin(self, p: float) -> bool:
        """A single biased coin: True with probability ``p``."""
        return self._next_uniform() < p
