"""Undirected view graph with oriented pairwise directions.

Vertices are 0..n-1.  Each undirected edge {i, j} carries one unit direction
stored for the canonical order i < j, pointing from j toward i; querying the
reversed order negates it.  The graph is immutable after construction:
screening builds new graphs instead of mutating.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sphere import UNIT_NORM_TOL
from .streams import TAG_TRIPLES, edge_rng

__all__ = ["ViewGraph", "TripleSample"]


@dataclass(frozen=True)
class TripleSample:
    """Common neighbors drawn (with replacement) for one edge.

    ``unsupported`` is set when the edge has no common neighbors at all, in
    which case ``neighbors`` is empty.
    """

    edge: tuple[int, int]
    neighbors: np.ndarray
    unsupported: bool


class ViewGraph:
    """Measurement graph over n vertices with per-edge unit directions."""

    def __init__(self, n: int, edges):
        """Build from an iterable of (i, j, direction) triples.

        The direction is interpreted in the order given: it points from j
        toward i.  Rejects self-loops, duplicate pairs, out-of-range ids and
        directions whose norm deviates from 1 by more than ``UNIT_NORM_TOL``
        (smaller deviations are renormalized away).
        """
        if n < 2:
            raise ValueError("a view graph needs at least 2 vertices")
        self._n = int(n)

        rows = []
        seen = set()
        for i, j, d in edges:
            i = int(i)
            j = int(j)
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"vertex pair ({i}, {j}) out of range for n={n}")
            a, b = (i, j) if i < j else (j, i)
            if (a, b) in seen:
                raise ValueError(f"duplicate edge ({a}, {b})")
            seen.add((a, b))
            d = np.asarray(d, dtype=np.float64)
            if d.shape != (3,):
                raise ValueError(f"direction of edge ({i}, {j}) is not a 3-vector")
            norm = float(np.linalg.norm(d))
            if abs(norm - 1.0) > UNIT_NORM_TOL:
                raise ValueError(
                    f"direction of edge ({i}, {j}) has norm {norm!r}, "
                    f"deviating from 1 by more than {UNIT_NORM_TOL}"
                )
            if abs(norm - 1.0) > 1e-12:
                d = d / norm
            if i > j:
                d = -d
            rows.append((a, b, d))

        rows.sort(key=lambda r: (r[0], r[1]))
        m = len(rows)
        self._edges = np.array([(a, b) for a, b, _ in rows], dtype=np.int64).reshape(m, 2)
        self._dirs = (
            np.array([d for _, _, d in rows], dtype=np.float64).reshape(m, 3)
        )
        self._keys = self._edges[:, 0] * self._n + self._edges[:, 1]
        self._row_of = {(int(a), int(b)): r for r, (a, b) in enumerate(self._edges)}

        adj: list[list[int]] = [[] for _ in range(self._n)]
        for a, b in self._edges:
            adj[a].append(int(b))
            adj[b].append(int(a))
        self._adj = [np.array(sorted(nb), dtype=np.int64) for nb in adj]

        for arr in (self._edges, self._dirs, self._keys):
            arr.setflags(write=False)

    # -- basic accessors ---------------------------------------------------

    @property
    def n(self) -> int:
        return self._n

    @property
    def num_edges(self) -> int:
        return self._edges.shape[0]

    @property
    def edge_array(self) -> np.ndarray:
        """(m, 2) canonical vertex pairs, lexicographically sorted."""
        return self._edges

    @property
    def direction_array(self) -> np.ndarray:
        """(m, 3) directions aligned with ``edge_array`` rows."""
        return self._dirs

    def edges(self) -> list[tuple[int, int]]:
        """Canonical edge list as tuples."""
        return [(int(a), int(b)) for a, b in self._edges]

    def has_edge(self, i: int, j: int) -> bool:
        a, b = (i, j) if i < j else (j, i)
        return (a, b) in self._row_of

    def edge_row(self, i: int, j: int) -> int:
        """Row index of edge {i, j} in the canonical arrays."""
        a, b = (i, j) if i < j else (j, i)
        try:
            return self._row_of[(a, b)]
        except KeyError:
            raise KeyError(f"edge ({i}, {j}) not in graph") from None

    def direction(self, i: int, j: int) -> np.ndarray:
        """Direction of edge {i, j}, oriented from j toward i."""
        d = self._dirs[self.edge_row(i, j)]
        return d.copy() if i < j else -d

    def neighbors(self, i: int) -> np.ndarray:
        return self._adj[i]

    def degree(self, i: int) -> int:
        return int(self._adj[i].size)

    # -- triangle machinery --------------------------------------------------

    def common_neighbors(self, i: int, j: int) -> np.ndarray:
        """Sorted vertices adjacent to both i and j (never includes i or j)."""
        self.edge_row(i, j)
        return np.intersect1d(self._adj[i], self._adj[j], assume_unique=True)

    def sample_triples(
        self,
        edge: tuple[int, int],
        s: int,
        seed: int,
        rng: np.random.Generator | None = None,
    ) -> TripleSample:
        """Draw ``s`` common neighbors of ``edge`` with replacement.

        The stream is derived from (seed, min, max) of the edge, so the
        sample is independent of edge iteration order.  Passing ``rng``
        explicitly continues an already-derived edge stream (used when the
        caller needs follow-up draws from the same stream).
        """
        if s < 1:
            raise ValueError("s must be >= 1")
        i, j = edge
        cands = self.common_neighbors(i, j)
        if cands.size == 0:
            return TripleSample(edge=(int(i), int(j)), neighbors=cands, unsupported=True)
        if rng is None:
            rng = edge_rng(seed, TAG_TRIPLES, i, j)
        picks = cands[rng.integers(0, cands.size, size=s)]
        return TripleSample(edge=(int(i), int(j)), neighbors=picks, unsupported=False)

    def edge_rows_of_pairs(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Vectorized ``edge_row`` for arrays of endpoints (any orientation).

        All queried pairs must be edges of the graph.
        """
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        keys = lo * self._n + hi
        rows = np.searchsorted(self._keys, keys)
        ok = (rows < self._keys.size) & (self._keys[np.minimum(rows, self._keys.size - 1)] == keys)
        if not ok.all():
            bad = np.argmax(~ok)
            raise KeyError(f"edge ({int(lo[bad])}, {int(hi[bad])}) not in graph")
        return rows

    def directions_of_pairs(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Vectorized ``direction``: rows point from b[k] toward a[k]."""
        rows = self.edge_rows_of_pairs(a, b)
        sign = np.where(a < b, 1.0, -1.0)
        return self._dirs[rows] * sign[:, None]

    # -- connectivity --------------------------------------------------------

    def active_vertices(self) -> np.ndarray:
        """Sorted vertices with degree >= 1."""
        return np.array([v for v in range(self._n) if self._adj[v].size > 0], dtype=np.int64)

    def is_connected_over_active(self) -> bool:
        """True if every vertex with an edge is in one connected component."""
        active = self.active_vertices()
        if active.size == 0:
            return False
        seen = {int(active[0])}
        stack = [int(active[0])]
        while stack:
            v = stack.pop()
            for w in self._adj[v]:
                w = int(w)
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == active.size
