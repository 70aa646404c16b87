"""Seeded, splittable, counter-based random streams.

Every random quantity in a run is drawn from a Philox generator whose key is
derived from ``(seed, *keys)`` through :class:`numpy.random.SeedSequence`.
The keys name where the numbers are used, e.g. ``(CHANNEL, k)`` for the
coefficient matrix of iteration ``k``, so a draw depends only on its position
and never on the order in which receivers or trials are evaluated.
"""

from __future__ import annotations

import numpy as np

# Key namespaces
TOPOLOGY = 0
INITIAL_STATE = 1
CHANNEL = 2
LINK = 3
TRIAL = 4
NOMOGRAPHIC = 5


def _seed_sequence(seed: int, keys: tuple[int, ...]) -> np.random.SeedSequence:
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))


def generator(seed: int, *keys: int) -> np.random.Generator:
    """Return the Philox stream for ``(seed, *keys)``."""
    return np.random.Generator(np.random.Philox(_seed_sequence(seed, keys)))


def derive_seed(seed: int, *keys: int) -> int:
    """Collapse ``(seed, *keys)`` into a fresh 64-bit seed for a child run."""
    return int(_seed_sequence(seed, keys).generate_state(1, dtype=np.uint64)[0])
