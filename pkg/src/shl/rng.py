"""Counter-based random streams for reproducible parallel Monte Carlo.

Every draw is a pure function of (master seed, stream id, counter), so a
simulation sliced across any number of workers produces bit-identical
output as long as each unit of work owns its own stream id.  The
generator is a Weyl-sequence/SplitMix64 construction: cheap, jumpable in
constant time, and statistically solid for simulation work (it is not
cryptographic).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDistributionError

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
_STREAM_SALT = 0x6A09E667F3BCC909

_INV_2_53 = 2.0 ** -53


def _mix(z: int) -> int:
    # SplitMix64 finalizer (Stafford mix13).
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX_A) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & _MASK64
    return z ^ (z >> 31)


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MIX_A)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MIX_B)
    z ^= z >> np.uint64(31)
    return z


@dataclass(frozen=True)
class MasterSeed:
    """64-bit master seed; any integer is legal (reduced mod 2**64)."""

    value: int

    def __post_init__(self):
        object.__setattr__(self, "value", int(self.value) & _MASK64)


class RandomStream:
    """One independent substream, identified by (master seed, stream_id).

    The stream owns a counter; scalar and vectorized draws advance it by
    exactly the number of 64-bit words consumed, so both paths produce
    the same sequence.
    """

    def __init__(self, master: MasterSeed, stream_id: int, counter: int = 0):
        self.master = master
        self.stream_id = int(stream_id) & _MASK64
        self.counter = int(counter)
        self._key = _mix(_mix(master.value) ^ _mix(self.stream_id ^ _STREAM_SALT))

    def _raw_words(self, n: int) -> np.ndarray:
        base = np.uint64((self._key + _GOLDEN * self.counter) & _MASK64)
        with np.errstate(over="ignore"):
            z = base + np.arange(1, n + 1, dtype=np.uint64) * np.uint64(_GOLDEN)
            words = _mix_array(z)
        self.counter += n
        return words

    def next_uniform(self) -> float:
        """One double in [0, 1) with 53 bits of mantissa entropy."""
        self.counter += 1
        word = _mix((self._key + _GOLDEN * self.counter) & _MASK64)
        return (word >> 11) * _INV_2_53

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles in [0, 1); same sequence as n next_uniform() calls."""
        return (self._raw_words(n) >> np.uint64(11)).astype(np.float64) * _INV_2_53

    def sample_categorical(self, weights) -> int:
        """Index i with probability weights[i]/sum(weights); one draw consumed."""
        cdf = _weights_to_cdf(weights)
        return int(np.searchsorted(cdf, self.next_uniform(), side="right"))

    def sample_categoricals(self, n: int, weights) -> np.ndarray:
        """Vectorized sample_categorical; consumes exactly n draws."""
        cdf = _weights_to_cdf(weights)
        return np.searchsorted(cdf, self.uniforms(n), side="right").astype(np.int64)

    def permutation(self, n: int) -> np.ndarray:
        """Random permutation of range(n); consumes n draws."""
        return np.argsort(self.uniforms(n), kind="stable")


def _weights_to_cdf(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.size == 0:
        raise InvalidDistributionError("empty weight vector")
    if np.any(w < 0):
        raise InvalidDistributionError("negative weight")
    total = w.sum()
    if total <= 0:
        raise InvalidDistributionError("weights sum to zero")
    cdf = np.cumsum(w) / total
    cdf[-1] = 1.0  # guard against roundoff excluding the last category
    return cdf


def make_stream(seed: MasterSeed, stream_id: int) -> RandomStream:
    """New stream positioned at counter 0; pure function of its arguments."""
    return RandomStream(seed, stream_id)
