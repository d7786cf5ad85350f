"""Deterministic random streams.

Every stochastic step draws from a generator keyed by (seed, purpose, indices),
so results do not depend on thread scheduling or on the order in which
independent tasks run.
"""

import zlib

import numpy as np


def _key(name: str, indices) -> tuple:
    return (zlib.crc32(name.encode("utf-8")), *(int(i) for i in indices))


def substream(seed: int, name: str, *indices: int) -> np.random.Generator:
    """
    Build an independent generator for one task.

    Args:
        seed: Master seed
        name: Purpose of the stream (e.g. "subsample", "reference")
        *indices: Task coordinates such as replicate or subject index

    Returns:
        A numpy Generator unique to (seed, name, indices)
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=_key(name, indices))
    return np.random.default_rng(sequence)


def derive_seed(seed: int, name: str, *indices: int) -> int:
    """Derive a 32-bit integer seed for libraries that take ``random_state``."""
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=_key(name, indices))
    return int(sequence.generate_state(1, dtype=np.uint32)[0])
