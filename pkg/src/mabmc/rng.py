"""Deterministic, splittable random streams.

Every stream is addressed by a (seed, stream) pair of 64-bit integers that
form the key of a counter-based Philox generator.  The same pair reproduces
the identical draw sequence on every run and platform (for a fixed numpy
version), and distinct stream ids give statistically independent sequences by
construction of the counter-based generator.  Child streams are derived by
mixing indices into the stream id, so a chain, its iteration phases, and any
per-configuration sub-streams can all be addressed without coordination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


def _mix64(value: int) -> int:
    """SplitMix64 finalizer; a bijection on 64-bit integers."""
    value = (value + 0x9E3779B97F4A7C15) & _MASK64
    value = ((value ^ (value >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    value = ((value ^ (value >> 27)) * 0x94D049BB133111EB) & _MASK64
    return value ^ (value >> 31)


@dataclass(frozen=True)
class RandomStream:
    """Address of one reproducible random stream.

    Attributes:
        seed: run-level seed shared by every stream of one experiment.
        stream: sub-stream id; distinct ids yield independent sequences.
    """

    seed: int
    stream: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)
        object.__setattr__(self, "stream", int(self.stream) & _MASK64)

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, *indices: int) -> "RandomStream":
        """Derive an independent sub-stream from one or more indices."""
        if not indices:
            raise ValueError("child() requires at least one index")
        h = self.stream
        for index in indices:
            h = _mix64(h ^ _mix64(int(index) & _MASK64))
        return RandomStream(self.seed, h)
