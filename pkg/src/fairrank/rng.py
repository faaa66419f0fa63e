"""Random number plumbing.

All samplers take a :class:`numpy.random.Generator`.  Exact DP sampling needs
uniform integers far beyond 64 bits, which :func:`randbelow` provides by
rejection on raw bytes from the same generator.
"""
from __future__ import annotations

import numpy as np

_INT64_LIMIT = 1 << 63


def as_generator(seed=None) -> np.random.Generator:
    """Coerce ``None``, an int, a SeedSequence or a Generator into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def randbelow(rng: np.random.Generator, n: int) -> int:
    """Uniform integer in ``[0, n)`` for arbitrarily large ``n``."""
    if n <= 0:
        raise ValueError("n must be positive")
    if n <= _INT64_LIMIT:
        return int(rng.integers(0, n))
    nbits = n.bit_length()
    nbytes = (nbits + 7) // 8
    excess = 8 * nbytes - nbits
    while True:
        r = int.from_bytes(rng.bytes(nbytes), "little") >> excess
        if r < n:
            return r


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator number ``index`` derived from a master seed.

    The child is addressed by its spawn key, so any stream can be rebuilt
    without generating the ones before it.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
