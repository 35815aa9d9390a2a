"""Seed plumbing: every random quantity in the package flows through here.

Trial-level reproducibility works by deriving an independent stream from
``(master_seed, stream_tag, *indices)`` with :class:`numpy.random.SeedSequence`,
so any single network or trial can be regenerated in isolation, in any order,
on any number of workers.
"""
from __future__ import annotations

import numpy as np

# Stream tags keep draws for different purposes statistically independent
# even when they share (master_seed, z, network, trial) coordinates.
STREAM_NETWORK = 1
STREAM_THETA = 2
STREAM_SHOCKS = 3
STREAM_THRESHOLDS = 4

SeedLike = "int | np.random.SeedSequence | np.random.Generator"


def as_generator(seed) -> np.random.Generator:
    """Coerce an int seed, SeedSequence, or Generator into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    if isinstance(seed, (int, np.integer)):
        return np.random.default_rng(int(seed))
    raise ValueError(f"cannot build a random generator from {seed!r}")


def stream_seed(master_seed: int, stream: int, *indices: int) -> np.random.SeedSequence:
    """Seed for one purpose-specific stream, keyed by integer coordinates."""
    return np.random.SeedSequence((int(master_seed), int(stream)) + tuple(int(i) for i in indices))


def stream_rng(master_seed: int, stream: int, *indices: int) -> np.random.Generator:
    return np.random.default_rng(stream_seed(master_seed, stream, *indices))
