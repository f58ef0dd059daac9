"""Named random substreams forked from one run seed.

Every consumer of randomness (split, init, shuffle, augmentation) draws from
its own generator, so changing how much one consumer draws never shifts the
numbers another one sees.
"""

import zlib
from typing import Dict

import numpy as np

SPLIT = "split"
INIT = "init"
SHUFFLE = "shuffle"
AUGMENT = "augment"


class SeedStreams:
    """Factory of independent, reproducible ``numpy.random.Generator`` objects."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._generators: Dict[str, np.random.Generator] = {}

    def seed_for(self, name: str) -> np.random.SeedSequence:
        """Seed sequence for the substream ``name``."""
        return np.random.SeedSequence(self.seed, spawn_key=(zlib.crc32(name.encode("utf-8")),))

    def generator(self, name: str) -> np.random.Generator:
        """Generator for ``name``; repeated calls return the same live generator."""
        if name not in self._generators:
            self._generators[name] = np.random.default_rng(self.seed_for(name))
        return self._generators[name]

    def fresh(self, name: str) -> np.random.Generator:
        """A new generator for ``name`` starting from the beginning of its stream."""
        return np.random.default_rng(self.seed_for(name))
