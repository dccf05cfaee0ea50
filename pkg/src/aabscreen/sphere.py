"""Geometry on the unit sphere S2.

Pairwise directions between camera locations live on S2.  Three directions
around a triangle are cycle-consistent exactly when the third one lies on the
consistency region Omega(g1, g2): the geodesic arc of unit vectors that are
positive combinations of -g1 and -g2.  The AAB inconsistency of g3 against
(g1, g2) is the great-circle distance from g3 to that arc.

Conventions used throughout:

* a unit vector is a float64 array of shape (3,) with Euclidean norm 1;
* angles are plain floats in radians, always in [0, pi];
* batch variants take (n, 3) arrays and skip per-row validation.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "UnitVector3",
    "Radians",
    "DegenerateBaseError",
    "UNIT_NORM_TOL",
    "DEGENERATE_BASE_TOL",
    "as_unit_vector",
    "great_circle_distance",
    "great_circle_distance_batch",
    "sample_uniform_sphere",
    "sample_uniform_sphere_batch",
    "aab_inconsistency",
    "aab_inconsistency_batch",
    "aab_inconsistency_oracle",
    "aab_oracle_batch",
    "degenerate_base_mask",
]

UnitVector3 = np.ndarray
Radians = float

# Inputs may deviate from unit norm by at most this much before rejection.
UNIT_NORM_TOL = 1e-6

# Base pair (g1, g2) with z = g1.g2 and z^2 > 1 - DEGENERATE_BASE_TOL is
# degenerate: the arc collapses to a point or covers a full great circle.
DEGENERATE_BASE_TOL = 1e-9


class DegenerateBaseError(ValueError):
    """The base pair is (anti)parallel, so the consistency arc is ill-defined."""


def as_unit_vector(v) -> UnitVector3:
    """Validate and return ``v`` as a float64 unit vector of shape (3,).

    Raises:
        ValueError: if the shape is not (3,) or the norm deviates from 1 by
            more than ``UNIT_NORM_TOL``.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {v.shape}")
    n = np.linalg.norm(v)
    if abs(n - 1.0) > UNIT_NORM_TOL:
        raise ValueError(f"vector norm {n!r} deviates from 1 by more than {UNIT_NORM_TOL}")
    return v / n


def great_circle_distance(u: UnitVector3, v: UnitVector3) -> Radians:
    """Angle between two unit vectors, in [0, pi].

    Uses the chord-based arcsine form, which stays accurate near 0 and pi
    where arccos of a clamped dot product loses half the significant digits.
    """
    u = as_unit_vector(u)
    v = as_unit_vector(v)
    if np.dot(u, v) >= 0.0:
        return float(2.0 * np.arcsin(min(1.0, np.linalg.norm(u - v) / 2.0)))
    return float(np.pi - 2.0 * np.arcsin(min(1.0, np.linalg.norm(u + v) / 2.0)))


def great_circle_distance_batch(U: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Row-wise angles between two (n, 3) arrays of unit vectors."""
    dots = np.einsum("...i,...i->...", U, V)
    near = 2.0 * np.arcsin(np.minimum(1.0, np.linalg.norm(U - V, axis=-1) / 2.0))
    far = np.pi - 2.0 * np.arcsin(np.minimum(1.0, np.linalg.norm(U + V, axis=-1) / 2.0))
    return np.where(dots >= 0.0, near, far)


def sample_uniform_sphere(stream: np.random.Generator) -> UnitVector3:
    """Draw one point uniformly from S2 (normalized isotropic Gaussian)."""
    while True:
        v = stream.normal(size=3)
        n = np.linalg.norm(v)
        if n > 0.0:
            return v / n


def sample_uniform_sphere_batch(stream: np.random.Generator, size: int) -> np.ndarray:
    """Draw ``size`` points uniformly from S2, shape (size, 3)."""
    v = stream.normal(size=(size, 3))
    n = np.linalg.norm(v, axis=1)
    bad = n == 0.0
    while bad.any():
        v[bad] = stream.normal(size=(int(bad.sum()), 3))
        n = np.linalg.norm(v, axis=1)
        bad = n == 0.0
    return v / n[:, None]


def degenerate_base_mask(G1: np.ndarray, G2: np.ndarray) -> np.ndarray:
    """Boolean mask of rows whose base pair is (anti)parallel."""
    z = np.einsum("ij,ij->i", G1, G2)
    return z * z > 1.0 - DEGENERATE_BASE_TOL


def aab_inconsistency(g3: UnitVector3, g1: UnitVector3, g2: UnitVector3) -> Radians:
    """Great-circle distance from ``g3`` to the consistency arc of (g1, g2).

    With x = g1.g3, y = g2.g3, z = g1.g2, the orthogonal projection of g3
    onto span{g1, g2} points into the arc iff x < y*z and y < x*z.  In that
    case the distance is the angle between g3 and its normalized projection,
    of cosine sqrt((x^2 + y^2 - 2xyz) / (1 - z^2)); otherwise it is the
    distance to the nearer arc endpoint, -g1 or -g2.

    The projection-branch angle is evaluated as atan2 of the perpendicular
    and in-plane component norms, which keeps exactly consistent triples at
    ~1e-15 instead of the ~1e-8 floor of arccos near 1.

    Raises:
        DegenerateBaseError: if g1 and g2 are parallel or antiparallel
            (z^2 > 1 - DEGENERATE_BASE_TOL).
    """
    g3 = as_unit_vector(g3)
    g1 = as_unit_vector(g1)
    g2 = as_unit_vector(g2)
    x = float(np.dot(g1, g3))
    y = float(np.dot(g2, g3))
    z = float(np.dot(g1, g2))
    if z * z > 1.0 - DEGENERATE_BASE_TOL:
        raise DegenerateBaseError(f"base pair nearly (anti)parallel: g1.g2 = {z!r}")
    if x < y * z and y < x * z:
        denom = 1.0 - z * z
        lam1 = (x - y * z) / denom
        lam2 = (y - x * z) / denom
        gp = lam1 * g1 + lam2 * g2
        perp = g3 - gp
        return float(np.arctan2(np.linalg.norm(perp), np.linalg.norm(gp)))
    return min(great_circle_distance(g3, -g1), great_circle_distance(g3, -g2))


def aab_inconsistency_batch(G3: np.ndarray, G1: np.ndarray, G2: np.ndarray) -> np.ndarray:
    """Row-wise AAB inconsistencies for (n, 3) arrays of unit vectors.

    No degeneracy check: callers must mask degenerate bases themselves
    (see ``degenerate_base_mask``); degenerate rows yield garbage.
    """
    x = np.einsum("ij,ij->i", G1, G3)
    y = np.einsum("ij,ij->i", G2, G3)
    z = np.einsum("ij,ij->i", G1, G2)
    inside = (x < y * z) & (y < x * z)

    with np.errstate(divide="ignore", invalid="ignore"):
        denom = 1.0 - z * z
        lam1 = (x - y * z) / denom
        lam2 = (y - x * z) / denom
    gp = lam1[:, None] * G1 + lam2[:, None] * G2
    perp = G3 - gp
    proj_angle = np.arctan2(np.linalg.norm(perp, axis=1), np.linalg.norm(gp, axis=1))

    end1 = great_circle_distance_batch(G3, -G1)
    end2 = great_circle_distance_batch(G3, -G2)
    return np.where(inside, proj_angle, np.minimum(end1, end2))


def _arc_grid_points(g1: np.ndarray, g2: np.ndarray, idx: np.ndarray, steps: int) -> np.ndarray:
    """Points of the uniform slerp grid on the arc from -g1 to -g2.

    ``g1``/``g2`` broadcast against ``idx``; index i maps to parameter
    u = i / (steps - 1).  Shared by the scan oracle and its fast batch
    equivalent so both evaluate bit-identical grid points.
    """
    z = np.einsum("...i,...i->...", g1, g2)
    psi = np.arccos(np.clip(z, -1.0, 1.0))
    u = idx / (steps - 1.0)
    s1 = np.sin((1.0 - u) * psi)
    s2 = np.sin(u * psi)
    return (s1[..., None] * (-g1) + s2[..., None] * (-g2)) / np.sin(psi)[..., None]


def aab_inconsistency_oracle(
    g3: UnitVector3,
    g1: UnitVector3,
    g2: UnitVector3,
    steps: int,
    chunk: int = 262144,
) -> Radians:
    """Brute-force AAB inconsistency: scan of ``steps`` slerp points.

    Evaluates the great-circle distance from ``g3`` to every point of the
    uniform grid on the arc from -g1 to -g2 (endpoints included) and returns
    the minimum.  Overestimates the true arc distance by at most
    (arc length) / (steps - 1).  Independent of the closed form: this is the
    reference the formula is checked against.
    """
    g3 = as_unit_vector(g3)
    g1 = as_unit_vector(g1)
    g2 = as_unit_vector(g2)
    if steps < 2:
        raise ValueError("steps must be >= 2")
    z = float(np.dot(g1, g2))
    if z * z > 1.0 - DEGENERATE_BASE_TOL:
        raise DegenerateBaseError(f"base pair nearly (anti)parallel: g1.g2 = {z!r}")
    best = np.inf
    for lo in range(0, steps, chunk):
        idx = np.arange(lo, min(lo + chunk, steps), dtype=np.float64)
        pts = _arc_grid_points(g1, g2, idx, steps)
        d = great_circle_distance_batch(np.broadcast_to(g3, pts.shape), pts)
        best = min(best, float(d.min()))
    return best


def aab_oracle_batch(G3: np.ndarray, G1: np.ndarray, G2: np.ndarray, steps: int) -> np.ndarray:
    """Grid minimum identical to ``aab_inconsistency_oracle``, rows at once.

    Avoids scanning all ``steps`` points: along the arc the cosine of the
    distance to g3 is a sinusoid in the arc parameter, so on a window
    shorter than half a period the grid minimum is attained at an endpoint
    or at a grid neighbor of the single interior critical point.  Only those
    candidate indices are evaluated, with the same grid-point construction
    and distance formula as the full scan.

    Rows with a degenerate base are the caller's problem, as in
    ``aab_inconsistency_batch``.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    x = np.einsum("ij,ij->i", G1, G3)
    y = np.einsum("ij,ij->i", G2, G3)
    z = np.einsum("ij,ij->i", G1, G2)
    psi = np.arccos(np.clip(z, -1.0, 1.0))

    # cos d(theta) = -(x sin(psi - theta) + y sin(theta)) / sin(psi) for
    # theta = u * psi; critical points solve tan(theta) = (y - xz)/(x sin psi).
    theta_star = np.arctan2(y - x * z, x * np.sin(psi))

    n = G3.shape[0]
    last = float(steps - 1)
    cands = [np.zeros(n), np.full(n, last)]
    for shift in (-np.pi, 0.0, np.pi):
        theta = theta_star + shift
        inside = (theta > 0.0) & (theta < psi)
        pos = np.where(inside, theta / psi * last, 0.0)
        base = np.floor(pos)
        for off in (-1.0, 0.0, 1.0, 2.0):
            cands.append(np.where(inside, np.clip(base + off, 0.0, last), 0.0))
    idx = np.stack(cands, axis=1)

    pts = _arc_grid_points(G1[:, None, :], G2[:, None, :], idx, steps)
    d = great_circle_distance_batch(np.broadcast_to(G3[:, None, :], pts.shape), pts)
    return d.min(axis=1)
