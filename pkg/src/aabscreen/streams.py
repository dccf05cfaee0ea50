"""Deterministic derived random streams.

Every randomized operation in the package draws from a Generator derived
from a user seed plus a structural key (a purpose tag and, for per-edge
streams, the canonical edge).  Streams therefore do not depend on iteration
order or thread scheduling, and identical seeds give identical results.
"""

from __future__ import annotations

import numpy as np

_SEED_MASK = (1 << 64) - 1

# Purpose tags keeping the derived streams of different draws disjoint.
TAG_LOCATIONS = 1
TAG_EDGE_PRESENCE = 2
TAG_CORRUPTION = 3
TAG_TRIPLES = 4
TAG_MONTE_CARLO = 5


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    """PCG64 generator keyed by ``(seed, *key)``.

    The seed is reduced to its unsigned 64-bit value; key parts must be
    non-negative integers.
    """
    entropy = (int(seed) & _SEED_MASK, *(int(k) for k in key))
    return np.random.default_rng(np.random.SeedSequence(entropy=entropy))


def edge_rng(seed: int, tag: int, i: int, j: int) -> np.random.Generator:
    """Per-edge stream, keyed by the canonical (min, max) vertex pair."""
    a, b = (i, j) if i < j else (j, i)
    return derive_rng(seed, tag, a, b)
