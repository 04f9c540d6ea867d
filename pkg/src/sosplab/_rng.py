"""Deterministic stream management.

Every random draw in the package flows through a counter-based Philox
generator keyed by a 64-bit seed.  Seeds for sub-streams are derived by
hashing labels, so independent components (oracle noise, estimator coins,
output selection) never share a stream and runs are reproducible
bit-for-bit from (seed, config) on a given backend.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(*parts: object) -> int:
    """Hash an arbitrary label tuple into a 64-bit seed.

    Labels are combined through their ``repr``, so ints, floats, strings and
    tuples are all stable across processes (no ``hash()`` randomization).
    """
    h = hashlib.sha256()
    for part in parts:
        h.update(repr(part).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest()[:8], "little")


def make_generator(seed: int) -> np.random.Generator:
    """Philox generator for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))


def spawn(seed: int, *labels: object) -> np.random.Generator:
    """Generator for the sub-stream of ``seed`` addressed by ``labels``."""
    return make_generator(derive_seed(seed, *labels))
