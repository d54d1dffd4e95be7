"""Seeded random streams.

Every stochastic component draws from a Philox (counter-based) generator
keyed by a :class:`numpy.random.SeedSequence`. Substreams are addressed by
a spawn key, so stream ``(seed, i, j)`` is the same on every platform and
does not depend on how many other streams were created before it.
"""

import numpy as np

MASK64 = (1 << 64) - 1


def make_rng(seed, *key):
    """Return a Philox generator for substream ``key`` of master ``seed``."""
    ss = np.random.SeedSequence(int(seed) & MASK64, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed, *key):
    """hash64(seed, *key): a stable 64-bit child seed."""
    ss = np.random.SeedSequence(int(seed) & MASK64, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
