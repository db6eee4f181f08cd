"""Counter-based splittable random streams.

A stream is the pair (seed, path).  Its generator is Philox keyed by a
SeedSequence whose spawn key is the path, so the draws of a child depend only
on its own (seed, path) and never on how many siblings were consumed before.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RandomStream:
    seed: int
    path: tuple = ()

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "path", tuple(int(i) for i in self.path))
        if any(i < 0 for i in self.path):
            raise ValueError("split indices must be nonnegative")

    def split(self, index):
        return RandomStream(self.seed, self.path + (int(index),))

    def generator(self):
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))

    def to_dict(self):
        return {"seed": self.seed, "path": list(self.path)}
