"""Synthetic view graphs under the uniform corruption model UC(n, p, q, sigma).

Ground-truth locations are i.i.d. standard 3D Gaussians, the measurement
graph is Erdos-Renyi G(n, p), and each edge direction is independently
replaced by a uniform sphere vector with probability q, otherwise perturbed
by sigma-scaled uniform noise and renormalized.

Draw order is fixed: locations first, then one inclusion draw per vertex
pair in lexicographic order, then per-edge corruption draws from streams
keyed by the edge itself.  Changing p therefore never reshuffles the
corruption outcome of an edge present under both values of p.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import ViewGraph
from .streams import (
    TAG_CORRUPTION,
    TAG_EDGE_PRESENCE,
    TAG_LOCATIONS,
    derive_rng,
    edge_rng,
)

__all__ = ["UCParams", "GroundTruth", "generate_uc"]

_COINCIDENT_TOL = 1e-12


@dataclass(frozen=True)
class UCParams:
    """Parameters of the uniform corruption model."""

    n: int
    p: float
    q: float
    sigma: float
    seed: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must be in [0, 1]")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("q must be in [0, 1]")
        if self.sigma < 0.0:
            raise ValueError("sigma must be >= 0")


@dataclass
class GroundTruth:
    """True locations, clean directions, and corruption provenance.

    ``corrupted_flags[edge]`` records which generator branch produced the
    measurement (exact, independent of any angle-based labeling rule applied
    at evaluation time).
    """

    locations: dict[int, np.ndarray]
    clean_directions: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)
    corrupted_flags: dict[tuple[int, int], bool] = field(default_factory=dict)


def _draw_locations(params: UCParams) -> np.ndarray:
    rng = derive_rng(params.seed, TAG_LOCATIONS)
    while True:
        t = rng.normal(size=(params.n, 3))
        diff = t[:, None, :] - t[None, :, :]
        dist = np.linalg.norm(diff, axis=2)
        np.fill_diagonal(dist, np.inf)
        if dist.min() >= _COINCIDENT_TOL:
            return t


def _draw_edge_set(params: UCParams) -> np.ndarray:
    rng = derive_rng(params.seed, TAG_EDGE_PRESENCE)
    iu, ju = np.triu_indices(params.n, k=1)
    u = rng.random(iu.size)
    keep = u < params.p
    return np.stack([iu[keep], ju[keep]], axis=1)


def generate_uc(params: UCParams) -> tuple[ViewGraph, GroundTruth]:
    """Generate one UC(n, p, q, sigma) instance, deterministic in the seed."""
    t = _draw_locations(params)
    pairs = _draw_edge_set(params)

    gt = GroundTruth(locations={v: t[v].copy() for v in range(params.n)})
    edges = []
    for i, j in pairs:
        i = int(i)
        j = int(j)
        diff = t[i] - t[j]
        clean = diff / np.linalg.norm(diff)

        rng = edge_rng(params.seed, TAG_CORRUPTION, i, j)
        corrupted = rng.random() < params.q
        if corrupted:
            v = rng.normal(size=3)
            while (nv := np.linalg.norm(v)) == 0.0:
                v = rng.normal(size=3)
            gamma = v / nv
        else:
            eps = rng.normal(size=3)
            while (ne := np.linalg.norm(eps)) == 0.0:
                eps = rng.normal(size=3)
            eps = eps / ne
            if params.sigma == 0.0:
                gamma = clean.copy()
            else:
                noisy = clean + params.sigma * eps
                gamma = noisy / np.linalg.norm(noisy)

        edges.append((i, j, gamma))
        gt.clean_directions[(i, j)] = clean
        gt.corrupted_flags[(i, j)] = bool(corrupted)

    return ViewGraph(params.n, edges), gt
