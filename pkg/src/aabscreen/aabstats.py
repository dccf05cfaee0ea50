"""Per-edge AAB statistics: the sampled triangle average and its
iteratively reweighted refinement.

For an edge {i, j} the naive statistic averages, over s common neighbors k
drawn with replacement, the AAB inconsistency of the edge direction against
the two directions closing the triangle (i, j, k).  The reweighted variant
keeps those sampled triangles and their cached inconsistencies, and for a
fixed number of rounds replaces the plain average with a weighted one, the
weight of triangle k decaying exponentially in the larger of the current
statistics of edges {k, i} and {j, k}.  The decay rate increases each round,
so triangles through currently-suspicious edges lose influence first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import ViewGraph
from .sphere import DEGENERATE_BASE_TOL, aab_inconsistency_batch
from .streams import TAG_TRIPLES, edge_rng

__all__ = [
    "AABConfig",
    "TripleCache",
    "IRDiagnostics",
    "EdgeStatistics",
    "naive_aab",
    "ir_aab",
]

# Retries per degenerate sampled triangle before it is dropped from the mean.
_MAX_RESAMPLE_ROUNDS = 8


@dataclass(frozen=True)
class AABConfig:
    """Sampling/iteration configuration shared by both statistics."""

    s: int = 50
    T: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.s < 1:
            raise ValueError("s must be >= 1")
        if self.T < 1:
            raise ValueError("T must be >= 1")


@dataclass
class TripleCache:
    """Flat record of every retained sampled triangle.

    Arrays are parallel; ``edge_rows``/``rows_jk``/``rows_ki`` index the
    graph's canonical edge arrays.
    """

    edge_rows: np.ndarray
    neighbors: np.ndarray
    rows_jk: np.ndarray
    rows_ki: np.ndarray
    inconsistencies: np.ndarray


@dataclass
class IRDiagnostics:
    """Reweighting internals of one ir_aab run."""

    initial_max: float
    initial_min: float
    step: float
    taus: list[float] = field(default_factory=list)
    weight_sums: list[np.ndarray] | None = None


@dataclass
class EdgeStatistics:
    """Statistic values per canonical edge.

    ``values`` holds supported edges only; edges without a single usable
    triangle are listed in ``unsupported`` instead.  ``per_iteration`` maps
    round number (0 = the plain average) to a full value map when retention
    was requested.  ``cache`` carries the sampled triangles and their
    inconsistencies so reweighting never re-evaluates geometry.
    """

    edges: list[tuple[int, int]]
    values: dict[tuple[int, int], float]
    unsupported: set[tuple[int, int]]
    per_iteration: dict[int, dict[tuple[int, int], float]] | None = None
    cache: TripleCache | None = None
    diagnostics: IRDiagnostics | None = None

    def value_array(self, g: ViewGraph) -> np.ndarray:
        """Values aligned with ``g.edge_array`` rows; NaN where unsupported."""
        out = np.full(g.num_edges, np.nan)
        for edge, v in self.values.items():
            out[g.edge_row(*edge)] = v
        return out


def _sample_all_edges(g: ViewGraph, cfg: AABConfig):
    """Initial s-samples for every edge plus the per-edge streams.

    Returns (edge_rows, neighbors, rngs, unsupported_rows); the streams are
    kept so degenerate triangles can be resampled from the same sequence.
    """
    erows = []
    ks = []
    rngs: dict[int, np.random.Generator] = {}
    unsupported = []
    for row, (i, j) in enumerate(g.edge_array):
        i = int(i)
        j = int(j)
        cands = g.common_neighbors(i, j)
        if cands.size == 0:
            unsupported.append(row)
            continue
        rng = edge_rng(cfg.seed, TAG_TRIPLES, i, j)
        rngs[row] = rng
        picks = cands[rng.integers(0, cands.size, size=cfg.s)]
        erows.append(np.full(cfg.s, row, dtype=np.int64))
        ks.append(picks)
    if erows:
        edge_rows = np.concatenate(erows)
        neighbors = np.concatenate(ks)
    else:
        edge_rows = np.empty(0, dtype=np.int64)
        neighbors = np.empty(0, dtype=np.int64)
    return edge_rows, neighbors, rngs, unsupported


def _base_degenerate(g: ViewGraph, edge_rows, neighbors) -> np.ndarray:
    i_arr = g.edge_array[edge_rows, 0]
    j_arr = g.edge_array[edge_rows, 1]
    g_jk = g.directions_of_pairs(j_arr, neighbors)
    g_ki = g.directions_of_pairs(neighbors, i_arr)
    z = np.einsum("ij,ij->i", g_jk, g_ki)
    return z * z > 1.0 - DEGENERATE_BASE_TOL


def _build_cache(g: ViewGraph, cfg: AABConfig):
    """Sample triangles, resample degenerate ones, evaluate inconsistencies."""
    edge_rows, neighbors, rngs, unsupported_rows = _sample_all_edges(g, cfg)

    if edge_rows.size:
        bad = _base_degenerate(g, edge_rows, neighbors)
        rounds = 0
        while bad.any() and rounds < _MAX_RESAMPLE_ROUNDS:
            rounds += 1
            for pos in np.flatnonzero(bad):
                row = int(edge_rows[pos])
                i, j = (int(v) for v in g.edge_array[row])
                cands = g.common_neighbors(i, j)
                neighbors[pos] = cands[int(rngs[row].integers(0, cands.size))]
            bad = _base_degenerate(g, edge_rows, neighbors)
        if bad.any():
            edge_rows = edge_rows[~bad]
            neighbors = neighbors[~bad]

    # edges whose every sample stayed degenerate have nothing to average
    present = np.zeros(g.num_edges, dtype=bool)
    present[edge_rows] = True
    unsupported_set = set(unsupported_rows)
    for row in rngs:
        if not present[row]:
            unsupported_set.add(row)
    unsupported_rows = unsupported_set

    i_arr = g.edge_array[edge_rows, 0]
    j_arr = g.edge_array[edge_rows, 1]
    g_ij = g.direction_array[edge_rows]
    g_jk = g.directions_of_pairs(j_arr, neighbors)
    g_ki = g.directions_of_pairs(neighbors, i_arr)
    inc = aab_inconsistency_batch(g_ij, g_jk, g_ki)

    rows_jk = g.edge_rows_of_pairs(j_arr, neighbors)
    rows_ki = g.edge_rows_of_pairs(neighbors, i_arr)
    cache = TripleCache(
        edge_rows=edge_rows,
        neighbors=neighbors,
        rows_jk=rows_jk,
        rows_ki=rows_ki,
        inconsistencies=inc,
    )
    return cache, sorted(unsupported_rows)


def _segment_mean(cache: TripleCache, num_edges: int) -> np.ndarray:
    counts = np.bincount(cache.edge_rows, minlength=num_edges)
    sums = np.bincount(cache.edge_rows, weights=cache.inconsistencies, minlength=num_edges)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)


def _to_statistics(
    g: ViewGraph,
    vals: np.ndarray,
    unsupported_rows,
    cache: TripleCache,
    per_iteration=None,
    diagnostics=None,
) -> EdgeStatistics:
    edges = g.edges()
    unsupported = {edges[r] for r in unsupported_rows}
    values = {edges[r]: float(vals[r]) for r in range(g.num_edges) if edges[r] not in unsupported}
    return EdgeStatistics(
        edges=edges,
        values=values,
        unsupported=unsupported,
        per_iteration=per_iteration,
        cache=cache,
        diagnostics=diagnostics,
    )


def naive_aab(g: ViewGraph, cfg: AABConfig) -> EdgeStatistics:
    """Sampled triangle-average AAB statistic for every edge.

    Edges without common neighbors are flagged unsupported; sampled
    triangles with an (anti)parallel base pair are resampled from the edge
    stream a bounded number of times, then dropped from the average.
    """
    cache, unsupported_rows = _build_cache(g, cfg)
    vals = _segment_mean(cache, g.num_edges)
    return _to_statistics(g, vals, unsupported_rows, cache)


def ir_aab(
    g: ViewGraph,
    cfg: AABConfig,
    keep_per_iteration: bool = False,
    keep_weight_sums: bool = False,
) -> EdgeStatistics:
    """Iteratively reweighted AAB statistic.

    Runs the naive stage once (same seed, same samples), then performs
    cfg.T synchronous reweighting rounds over the cached inconsistencies.
    Round t uses rate tau = pi / M_t where M_t descends linearly from the
    largest cached inconsistency toward the smallest.  Lookups of a
    neighboring edge's previous statistic fall back to the median supported
    statistic when that edge is unsupported.

    If every cached inconsistency is zero the naive (all-zero) statistic is
    returned unchanged, avoiding a division by zero in the rate.
    """
    cache, unsupported_rows = _build_cache(g, cfg)
    m_edges = g.num_edges
    vals = _segment_mean(cache, m_edges)

    per_iter = {0: {}} if keep_per_iteration else None
    edges = g.edges()
    unsupported_set = {edges[r] for r in unsupported_rows}
    if keep_per_iteration:
        per_iter[0] = {
            edges[r]: float(vals[r]) for r in range(m_edges) if edges[r] not in unsupported_set
        }

    if cache.inconsistencies.size == 0:
        return _to_statistics(g, vals, unsupported_rows, cache, per_iteration=per_iter)

    big = float(cache.inconsistencies.max())
    small = float(cache.inconsistencies.min())
    if big == 0.0:
        diag = IRDiagnostics(initial_max=0.0, initial_min=0.0, step=0.0)
        return _to_statistics(
            g, vals, unsupported_rows, cache, per_iteration=per_iter, diagnostics=diag
        )

    step = (big - small) / cfg.T
    diag = IRDiagnostics(
        initial_max=big,
        initial_min=small,
        step=step,
        weight_sums=[] if keep_weight_sums else None,
    )

    supported_mask = np.ones(m_edges, dtype=bool)
    supported_mask[list(unsupported_rows)] = False

    current = big
    for _ in range(cfg.T):
        tau = np.pi / current
        diag.taus.append(float(tau))
        current -= step

        lookup = vals.copy()
        if not supported_mask.all():
            lookup[~supported_mask] = np.median(vals[supported_mask])
        worst = np.maximum(lookup[cache.rows_ki], lookup[cache.rows_jk])
        w = np.exp(-tau * worst)
        sums = np.bincount(cache.edge_rows, weights=w, minlength=m_edges)
        wn = w / sums[cache.edge_rows]
        if keep_weight_sums:
            diag.weight_sums.append(np.bincount(cache.edge_rows, weights=wn, minlength=m_edges))
        new_vals = np.bincount(
            cache.edge_rows, weights=wn * cache.inconsistencies, minlength=m_edges
        )
        vals = np.where(supported_mask, new_vals, np.nan)

        if keep_per_iteration:
            t_idx = len(diag.taus)
            per_iter[t_idx] = {
                edges[r]: float(vals[r]) for r in range(m_edges) if supported_mask[r]
            }

    return _to_statistics(
        g, vals, unsupported_rows, cache, per_iteration=per_iter, diagnostics=diag
    )
