"""Shared helpers for building small exact instances."""

from __future__ import annotations

import numpy as np
import pytest

from aabscreen.graph import ViewGraph


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return v / np.linalg.norm(v)


def random_units(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def complete_graph_from_locations(t: np.ndarray) -> ViewGraph:
    """Exact directions of every pair, pointing from j toward i for i < j."""
    n = t.shape[0]
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            d = t[i] - t[j]
            edges.append((i, j, d / np.linalg.norm(d)))
    return ViewGraph(n, edges)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)
