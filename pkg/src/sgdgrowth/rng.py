"""Seeded random streams.

Every stream in the package is ``numpy.random.Generator(Philox(key=seed))``:
Philox4x64-10, a counter-based generator whose state transition is a
counter increment and whose key is the 64-bit seed. Per-replica seeds are
derived with the SplitMix64 finalizer, so a replica's stream depends only
on (master seed, replica index).

Changing either choice changes every reported number; don't.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(z: int) -> int:
    """SplitMix64 output function (full 64-bit avalanche)."""
    z = (z + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    return splitmix64((splitmix64(master & MASK64) ^ (index & MASK64)) & MASK64)


def make_rng(seed: int) -> np.random.Generator:
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed {seed} is not an unsigned 64-bit integer")
    return np.random.Generator(np.random.Philox(key=seed))
