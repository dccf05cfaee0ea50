"""Camera location recovery from pairwise directions at desk scale.

The least-squares solver minimizes projection residuals ||P(t_i - t_j)||^2
with P = I - gamma gamma^T, the component of the displacement orthogonal to
the measured direction, as a single constrained eigenvector problem.

The robust solver approximately minimizes the sum of unsquared deviations
||(t_i - t_j) - l_e gamma_e|| over locations and per-edge displacement
lengths l_e >= 1, by alternating exact length updates with inverse-residual
weighted Laplacian solves (initialized from the spectral solution).  The
length floor is essential: under a norm gauge alone, the unsquared objective
is globally minimized by near-collapsed configurations once a sizable
fraction of directions is corrupted, and plain reweighting of the spectral
problem descends straight into them.

Locations are recoverable only up to translation and scale (and a global
reflection, since the residuals are even in t).  Estimates are gauge-fixed
to zero centroid and unit sum of squared norms over the solved vertices;
comparisons against ground truth go through the closed-form similarity
alignment, whose scale is sign-free and absorbs the reflection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.linalg

from .graph import ViewGraph

__all__ = [
    "DegenerateInstanceError",
    "LocationEstimate",
    "solve_ls_spectral",
    "solve_irls_lud",
    "align_similarity",
]

# Gap between the two smallest constrained eigenvalues below which the
# instance does not pin down a unique location shape.
_GAP_TOL = 1e-10

_CONVERGENCE_TOL = 1e-10


class DegenerateInstanceError(RuntimeError):
    """The directions do not determine the locations up to gauge."""


@dataclass
class LocationEstimate:
    """Gauge-fixed location estimate over the solved vertex set.

    ``residuals`` maps each edge to the projection residual of the final
    iterate.  ``objective_trace`` (robust solver only) records the smoothed
    unsquared objective after every iteration.
    """

    locations: dict[int, np.ndarray]
    residuals: dict[tuple[int, int], float]
    converged: bool
    iterations: int
    objective_trace: list[float] | None = None


def _solver_vertices(g: ViewGraph) -> np.ndarray:
    verts = g.active_vertices()
    if verts.size < 2:
        raise ValueError("need at least 2 vertices with edges")
    if not g.is_connected_over_active():
        raise ValueError("measurement graph is not connected")
    return verts


def _assemble(g: ViewGraph, verts: np.ndarray, weights: np.ndarray | None) -> np.ndarray:
    """Dense 3N x 3N quadratic form of the weighted projection objective."""
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[verts] = np.arange(verts.size)
    ip = pos[g.edge_array[:, 0]]
    jp = pos[g.edge_array[:, 1]]

    d = g.direction_array
    proj = np.eye(3)[None, :, :] - d[:, :, None] * d[:, None, :]
    if weights is not None:
        proj = proj * weights[:, None, None]

    n = verts.size
    blocks = np.zeros((n, n, 3, 3))
    np.add.at(blocks, (ip, ip), proj)
    np.add.at(blocks, (jp, jp), proj)
    np.add.at(blocks, (ip, jp), -proj)
    np.add.at(blocks, (jp, ip), -proj)
    return blocks.transpose(0, 2, 1, 3).reshape(3 * n, 3 * n)


def _edge_residuals(g: ViewGraph, pos: np.ndarray, t: np.ndarray) -> np.ndarray:
    ti = t[pos[g.edge_array[:, 0]]]
    tj = t[pos[g.edge_array[:, 1]]]
    diff = ti - tj
    d = g.direction_array
    along = np.einsum("ij,ij->i", diff, d)
    rej = diff - along[:, None] * d
    return np.linalg.norm(rej, axis=1)


def _solve_weighted(g: ViewGraph, weights: np.ndarray | None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One constrained eigen-solve; returns (verts, t, residuals)."""
    verts = _solver_vertices(g)
    n = verts.size
    a = _assemble(g, verts, weights)

    # Rigid translations span a 3-dim null space of the form; lift them with
    # a centroid penalty so the smallest eigenvector is automatically
    # centroid-free.
    mu = 2.0 * float(np.abs(a).sum(axis=1).max()) + 1.0
    lift = np.kron(np.full((n, n), mu / n), np.eye(3))
    evals, evecs = scipy.linalg.eigh(a + lift, subset_by_index=[0, 1])

    if evals[1] - evals[0] < _GAP_TOL:
        raise DegenerateInstanceError(
            f"constrained spectral gap {evals[1] - evals[0]:.3e} below {_GAP_TOL}; "
            "instance is (near-)degenerate"
        )

    t = evecs[:, 0].reshape(n, 3)
    t = t - t.mean(axis=0)
    t = t / np.linalg.norm(t)

    pos = np.full(g.n, -1, dtype=np.int64)
    pos[verts] = np.arange(n)
    return verts, t, _edge_residuals(g, pos, t)


def _to_estimate(g: ViewGraph, verts, t, res, converged: bool, iterations: int) -> LocationEstimate:
    locations = {int(v): t[k].copy() for k, v in enumerate(verts)}
    residuals = {
        (int(i), int(j)): float(r) for (i, j), r in zip(g.edge_array, res)
    }
    return LocationEstimate(
        locations=locations, residuals=residuals, converged=converged, iterations=iterations
    )


def solve_ls_spectral(g: ViewGraph) -> LocationEstimate:
    """Least-squares locations: smallest constrained eigenvector.

    Minimizes the sum of squared projection residuals subject to zero
    centroid and unit total squared norm.  Raises DegenerateInstanceError
    when the two smallest constrained eigenvalues (nearly) coincide, e.g.
    for collinear locations or non-rigid graphs.
    """
    verts, t, res = _solve_weighted(g, None)
    return _to_estimate(g, verts, t, res, converged=True, iterations=1)


def _gauge_fixed(t: np.ndarray) -> np.ndarray:
    c = t - t.mean(axis=0)
    return c / np.linalg.norm(c)


def solve_irls_lud(g: ViewGraph, max_iters: int = 100, delta: float = 1e-8) -> LocationEstimate:
    """Robust locations by iteratively reweighted least squares.

    Approximately minimizes the sum over edges of the distance from
    t_i - t_j to the ray {l * gamma : l >= 1}.  Starting from the spectral
    solution (sign- and scale-adjusted so the length floor starts inactive
    on typical edges), each round sets l_e = max(1, <t_i - t_j, gamma_e>),
    computes residuals r_e = ||(t_i - t_j) - l_e gamma_e|| and weights
    1 / max(r_e, delta), and solves the weighted normal equations, a graph
    Laplacian system.  The floor l >= 1 prevents the near-collapsed
    configurations that otherwise minimize the unsquared objective under
    heavy corruption; ``delta`` is the residual scale below which an edge is
    treated as an inlier.

    Iterates are compared after gauge fixing and similarity alignment;
    convergence at change <= 1e-10 or after ``max_iters`` total iterations
    (the initialization counts as the first).
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if delta <= 0.0:
        raise ValueError("delta must be > 0")

    verts, t, _ = _solve_weighted(g, None)
    n = verts.size
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[verts] = np.arange(n)
    ia = pos[g.edge_array[:, 0]]
    ja = pos[g.edge_array[:, 1]]
    gam = g.direction_array

    def dots_of(tt):
        return np.einsum("ij,ij->i", tt[ia] - tt[ja], gam)

    # Resolve the spectral sign ambiguity toward positive displacements and
    # rescale so the length floor starts inactive: consistent data then has
    # every l_e = <diff, gamma> >= 1 and the exact shape is a fixed point.
    # The cap keeps near-zero dots of corrupted edges from blowing the scale.
    dots = dots_of(t)
    if dots.sum() < 0.0:
        t = -t
        dots = -dots
    positive = dots[dots > 0.0]
    med = float(np.median(positive)) if positive.size else 1.0
    low = float(positive.min()) if positive.size else 1.0
    t = t * min(1.0 / max(low, 1e-12), 10.0 / max(med, 1e-12))

    def smoothed_objective(r):
        # Huber-style descent function matched to the 1/max(r, delta) weights
        small = r < delta
        return float(np.where(small, (r * r + delta * delta) / (2.0 * delta), r).sum())

    trace = []
    converged = False
    iterations = 1
    for _ in range(max_iters - 1):
        diffs = t[ia] - t[ja]
        ell = np.maximum(1.0, np.einsum("ij,ij->i", diffs, gam))
        r = np.linalg.norm(diffs - ell[:, None] * gam, axis=1)
        w = 1.0 / np.maximum(r, delta)

        lap = np.zeros((n, n))
        np.add.at(lap, (ia, ia), w)
        np.add.at(lap, (ja, ja), w)
        np.add.at(lap, (ia, ja), -w)
        np.add.at(lap, (ja, ia), -w)
        rhs = np.zeros((n, 3))
        contrib = (w * ell)[:, None] * gam
        np.add.at(rhs, ia, contrib)
        np.add.at(rhs, ja, -contrib)
        mu = float(np.trace(lap)) / n + 1.0
        t_new = scipy.linalg.solve(lap + mu / n, rhs, assume_a="pos")
        t_new = t_new - t_new.mean(axis=0)

        iterations += 1
        diffs = t_new[ia] - t_new[ja]
        ell = np.maximum(1.0, np.einsum("ij,ij->i", diffs, gam))
        trace.append(smoothed_objective(np.linalg.norm(diffs - ell[:, None] * gam, axis=1)))

        a = _gauge_fixed(t_new)
        b = _gauge_fixed(t)
        s, shift = _fit_similarity(a, b)
        change = float(np.linalg.norm(s * a + shift - b))
        t = t_new
        if change <= _CONVERGENCE_TOL:
            converged = True
            break

    t = _gauge_fixed(t)
    res = _edge_residuals(g, pos, t)
    est = _to_estimate(g, verts, t, res, converged=converged, iterations=iterations)
    est.objective_trace = trace
    return est


def _fit_similarity(x: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """Least-squares scale and shift mapping rows of x onto rows of y."""
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    denom = float(np.sum(xc * xc))
    if denom < 1e-15:
        raise ValueError("all source points coincide; similarity fit is undefined")
    s = float(np.sum(xc * yc)) / denom
    b = y.mean(axis=0) - s * x.mean(axis=0)
    return s, b


def align_similarity(
    est: LocationEstimate | Mapping[int, np.ndarray],
    gt_locations: Mapping[int, np.ndarray],
) -> tuple[float, np.ndarray, dict[int, np.ndarray]]:
    """Best scale/shift of an estimate onto reference locations.

    Returns (scale, shift, aligned) where aligned[v] = scale * est[v] + shift
    for every estimated vertex.  The scale is unconstrained in sign, so a
    globally reflected estimate aligns as well as an unreflected one.

    Raises:
        ValueError: if an estimated vertex has no reference location, or if
            all estimated points coincide.
    """
    locs = est.locations if isinstance(est, LocationEstimate) else est
    verts = sorted(locs)
    if not verts:
        raise ValueError("empty estimate")
    missing = [v for v in verts if v not in gt_locations]
    if missing:
        raise ValueError(f"vertices {missing[:5]} have no reference location")
    x = np.array([locs[v] for v in verts], dtype=np.float64)
    y = np.array([gt_locations[v] for v in verts], dtype=np.float64)
    s, b = _fit_similarity(x, y)
    aligned = {v: s * locs[v] + b for v in verts}
    return s, b, aligned
