"""Seeded random streams."""

import numpy as np

from .hashing import stable_int


def derive_rng(seed: int, *keys: str) -> np.random.Generator:
    """PCG64 generator for ``seed`` and a tuple of string keys.

    Each (seed, keys) pair has its own stream, so per-item or per-user work
    draws the same numbers whatever order it is scheduled in.
    """
    entropy = [int(seed)] + [stable_int(k) for k in keys]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
