"""Counter-based random streams for reproducible, embarrassingly parallel sampling.

Every stream is a numpy Philox generator keyed by the pair
(master seed, packed index). Identical (seed, index) always reproduces the same
sample sequence; distinct indices give independent streams by construction, so
workers never need to coordinate. The packed index carries an operation tag, a
sub-key (for example the step count n of a return experiment) and a block
number:

    index = tag << 56 | subkey << 32 | block      (subkey < 2^24, block < 2^32)

Trials are grouped into fixed blocks of BLOCK_TRIALS; a block is the atomic work
unit, so any partition of blocks across workers merges to the same result.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ParameterError

MASK64 = (1 << 64) - 1

#: trials per stream block; the atomic, partition-independent work unit
BLOCK_TRIALS = 4096

# operation tags for packed stream indices
TAG_ARRIVALS = 1
TAG_RETURN = 2
TAG_SIMULATE = 3
TAG_VISITS = 4


def pack_index(tag: int, subkey: int = 0, block: int = 0) -> int:
    if not (0 <= tag < 1 << 8):
        raise ParameterError(f"tag out of range: {tag}")
    if not (0 <= subkey < 1 << 24):
        raise ParameterError(f"subkey out of range: {subkey}")
    if not (0 <= block < 1 << 32):
        raise ParameterError(f"block out of range: {block}")
    return (tag << 56) | (subkey << 32) | block


@dataclass
class RandomStream:
    """One counter-based stream, identified by (seed, index)."""

    seed: int
    index: int = 0
    _gen: np.random.Generator | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not (0 <= self.seed <= MASK64):
            raise ParameterError(f"seed must fit in 64 bits, got {self.seed}")
        if not (0 <= self.index <= MASK64):
            raise ParameterError(f"index must fit in 64 bits, got {self.index}")

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            key = np.array([self.seed, self.index], dtype=np.uint64)
            self._gen = np.random.Generator(np.random.Philox(key=key))
        return self._gen

    def substream(self, tag: int, subkey: int = 0, block: int = 0) -> "RandomStream":
        """Fresh independent stream for (tag, subkey, block) under the same master seed."""
        return RandomStream(self.seed, pack_index(tag, subkey, block))

    def bernoulli_bits(self, p: Fraction, shape: int | tuple[int, ...]) -> np.ndarray:
        """Bernoulli(p) bits with p hit exactly: draw uniform integers below the denominator."""
        if not (0 <= p <= 1):
            raise ParameterError(f"p must be in [0,1], got {p}")
        if p == 0:
            return np.zeros(shape, dtype=np.int8)
        if p == 1:
            return np.ones(shape, dtype=np.int8)
        draws = self.generator.integers(0, p.denominator, size=shape, dtype=np.int64)
        return (draws < p.numerator).astype(np.int8)
