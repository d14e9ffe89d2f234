"""Deterministic counter-based RNG for the synthetic-scene generator.

SplitMix64: output_i = scramble(seed + i * GOLDEN) where scramble is the
published two-round xor-multiply finalizer.  Every draw is a pure function
of (seed, counter), so streams are reproducible across platforms and
order-independent — block i can be generated without generating blocks
0..i-1.  numpy's own Generator is deliberately not used for scene content
because its bit streams are not pinned across numpy versions.

Scalar helpers work in Python ints masked to 64 bits; the vectorized
block path uses uint64 arrays whose multiplication wraps silently (numpy
warns on *scalar* uint64 overflow, hence the split).
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _scramble(x: int) -> int:
    x = (x ^ (x >> 30)) * _MIX1 & _MASK
    x = (x ^ (x >> 27)) * _MIX2 & _MASK
    return x ^ (x >> 31)


def derive_seed(master: int, index: int) -> int:
    """Child seed for stream ``index`` of ``master``; double-scrambled so
    nearby indices land in unrelated parts of the sequence."""
    return _scramble(_scramble((master + index * _GOLDEN) & _MASK))


class CounterRng:
    """Stateful façade over the stateless counter stream."""

    def __init__(self, seed: int) -> None:
        self.seed = seed & _MASK
        self.counter = 0

    def _raw_block(self, n: int) -> np.ndarray:
        """Next n raw 64-bit outputs as uint64."""
        idx = np.arange(self.counter, self.counter + n, dtype=np.uint64)
        self.counter += n
        x = np.uint64(self.seed) + idx * np.uint64(_GOLDEN)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
        return x ^ (x >> np.uint64(31))

    def next_raw(self) -> int:
        x = _scramble((self.seed + self.counter * _GOLDEN) & _MASK)
        self.counter += 1
        return x

    def uniform(self, shape=None) -> np.ndarray:
        """Uniforms in [0, 1) at 53-bit resolution."""
        if shape is None:
            return (self.next_raw() >> 11) * 2.0 ** -53
        n = int(np.prod(shape))
        u = (self._raw_block(n) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
        return u.reshape(shape)

    def _open_uniform(self, n: int) -> np.ndarray:
        """Uniforms in (0, 1]; safe as a log argument."""
        return ((self._raw_block(n) >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0 ** -53

    def normal(self, mean: float = 0.0, sigma: float = 1.0, shape=None) -> np.ndarray:
        """Box-Muller normals; consumes two raw draws per output pair."""
        scalar = shape is None
        if scalar:
            shape = (1,)
        n = int(np.prod(shape))
        pairs = (n + 1) // 2
        u1 = self._open_uniform(pairs)
        u2 = (self._raw_block(pairs) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:n]
        out = mean + sigma * z
        return float(out[0]) if scalar else out.reshape(shape)

    def randint(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi).  Plain modulo — the bias is ~(hi-lo)/2^64,
        irrelevant for the small ranges used here."""
        if hi <= lo:
            raise ValueError(f"empty range [{lo}, {hi})")
        return lo + self.next_raw() % (hi - lo)

    def randint_block(self, lo: int, hi: int, n: int) -> np.ndarray:
        """n integers in [lo, hi) as int64, same modulo scheme as randint."""
        if hi <= lo:
            raise ValueError(f"empty range [{lo}, {hi})")
        raw = self._raw_block(n) % np.uint64(hi - lo)
        return lo + raw.astype(np.int64)
