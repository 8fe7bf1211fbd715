"""Deterministic, splittable random streams.

Every stochastic operation in the package takes a ``RandomStream`` so a run
is reproducible from its manifest.  Streams are counter-based (Philox):
the (seed, stream) pair fully determines the sequence on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ALGORITHM = "philox4x64"


@dataclass(frozen=True)
class RandomStream:
    """Identifies one reproducible random sequence."""

    seed: int
    stream: int = 0
    algorithm: str = ALGORITHM

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if not 0 <= self.stream < 2**64:
            raise ValueError("stream index must fit in 64 bits")
        if self.algorithm != ALGORITHM:
            raise ValueError(f"unknown rng algorithm {self.algorithm!r}")

    def generator(self) -> np.random.Generator:
        """A fresh numpy Generator positioned at the start of the stream."""
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, stream: int) -> "RandomStream":
        """Derive a sibling stream under the same seed."""
        return RandomStream(self.seed, stream)

    def scalar_seed(self) -> int:
        """Fold (seed, stream) into one 64-bit value for kernels that take
        a plain integer seed.  Uses splitmix64 so distinct pairs map to
        well-separated values."""
        x = (self.seed ^ (self.stream * 0x9E3779B97F4A7C15)) & 0xFFFFFFFFFFFFFFFF
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & 0xFFFFFFFFFFFFFFFF
        x = (x ^ (x >> 27)) * 0x94D049BB133111EB & 0xFFFFFFFFFFFFFFFF
        return (x ^ (x >> 31)) & 0xFFFFFFFFFFFFFFFF


def seeded_stream(seed: int, stream: int = 0) -> RandomStream:
    """Create an independent reproducible stream."""
    return RandomStream(seed, stream)
