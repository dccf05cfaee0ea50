"""Monte Carlo checks of the analytic pieces behind the AAB statistic.

Three checks are provided: the mean inconsistency of a direction at a fixed
angle from one base endpoint against a uniformly random second base vector
(compared with the reference curve (x + sin x) / 2), the mean inconsistency
of fully random triples, and agreement of the closed-form inconsistency with
the brute-force arc-scan oracle.  The last one also quantifies how far the
variant without the square root (the projection length squared in place of
the length) strays from the oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sphere import (
    aab_inconsistency_batch,
    aab_oracle_batch,
    degenerate_base_mask,
    sample_uniform_sphere_batch,
)
from .streams import TAG_MONTE_CARLO, derive_rng

__all__ = [
    "McEstimate",
    "FormulaComparison",
    "reference_mean_inconsistency",
    "mc_estimate_f",
    "mc_estimate_Z",
    "aab_as_printed_batch",
    "formula_vs_oracle",
]

_CHUNK = 200_000


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo mean with its standard error."""

    value: float
    std_error: float
    samples: int
    seed: int


@dataclass(frozen=True)
class FormulaComparison:
    """Worst-case deviations of both formula variants from the arc oracle."""

    max_abs_dev_corrected: float
    max_abs_dev_as_printed: float
    samples: int
    oracle_steps: int
    seed: int


def reference_mean_inconsistency(x: float) -> float:
    """Reference curve (x + sin x) / 2 that ``mc_estimate_f`` is checked against."""
    return 0.5 * (x + np.sin(x))


def _mc_mean(draw, samples: int, seed: int) -> McEstimate:
    """Chunked mean/SE of ``draw(rng, size) -> values``."""
    rng = derive_rng(seed, TAG_MONTE_CARLO)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        size = min(_CHUNK, samples - done)
        vals = draw(rng, size)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += size
    mean = total / samples
    var = max(0.0, (total_sq - samples * mean * mean) / max(samples - 1, 1))
    return McEstimate(
        value=mean,
        std_error=float(np.sqrt(var / samples)),
        samples=samples,
        seed=seed,
    )


def _nondegenerate_uniform(rng: np.random.Generator, size: int, fixed: np.ndarray) -> np.ndarray:
    """Uniform sphere draws whose pairing with ``fixed`` is non-degenerate."""
    v = sample_uniform_sphere_batch(rng, size)
    bad = degenerate_base_mask(np.broadcast_to(fixed, v.shape), v)
    while bad.any():
        v[bad] = sample_uniform_sphere_batch(rng, int(bad.sum()))
        bad = degenerate_base_mask(np.broadcast_to(fixed, v.shape), v)
    return v


def mc_estimate_f(x: float, samples: int, seed: int) -> McEstimate:
    """Mean inconsistency of a direction x radians from one arc endpoint.

    Averages the AAB inconsistency of (cos x, sin x, 0) against the base
    pair ((-1, 0, 0), v) with v uniform on S2.  The handful of draws with a
    degenerate base (measure zero) are redrawn.
    """
    if not 0.0 <= x <= np.pi:
        raise ValueError("x must be in [0, pi]")
    if samples < 1000:
        raise ValueError("samples must be >= 1000")
    v1 = np.array([-1.0, 0.0, 0.0])
    v2 = np.array([np.cos(x), np.sin(x), 0.0])

    def draw(rng, size):
        v = _nondegenerate_uniform(rng, size, v1)
        g3 = np.broadcast_to(v2, v.shape)
        g1 = np.broadcast_to(v1, v.shape)
        return aab_inconsistency_batch(g3, g1, v)

    return _mc_mean(draw, samples, seed)


def mc_estimate_Z(samples: int, seed: int) -> McEstimate:
    """Mean AAB inconsistency of independent uniform triples."""
    if samples < 1000:
        raise ValueError("samples must be >= 1000")

    def draw(rng, size):
        g1 = sample_uniform_sphere_batch(rng, size)
        g2 = sample_uniform_sphere_batch(rng, size)
        g3 = sample_uniform_sphere_batch(rng, size)
        bad = degenerate_base_mask(g1, g2)
        while bad.any():
            g2[bad] = sample_uniform_sphere_batch(rng, int(bad.sum()))
            bad = degenerate_base_mask(g1, g2)
        return aab_inconsistency_batch(g3, g1, g2)

    return _mc_mean(draw, samples, seed)


def aab_as_printed_batch(G3: np.ndarray, G1: np.ndarray, G2: np.ndarray) -> np.ndarray:
    """Formula variant without the square root, kept only for comparison.

    In the projection branch this evaluates arccos of the squared projection
    length instead of the length, which overstates the angle whenever the
    projection is strictly inside the arc.  Never used by the statistics.
    """
    x = np.einsum("ij,ij->i", G1, G3)
    y = np.einsum("ij,ij->i", G2, G3)
    z = np.einsum("ij,ij->i", G1, G2)
    inside = (x < y * z) & (y < x * z)
    val = np.where(
        inside,
        (x * x + y * y - 2.0 * x * y * z) / (1.0 - z * z),
        -np.minimum(x, y),
    )
    return np.arccos(np.clip(val, -1.0, 1.0))


def formula_vs_oracle(samples: int, oracle_steps: int, seed: int) -> FormulaComparison:
    """Worst-case |formula - oracle| over random non-degenerate triples.

    Compares both the corrected closed form and the as-printed (no square
    root) variant against the arc-scan oracle with the given grid size.
    """
    if samples < 1000:
        raise ValueError("samples must be >= 1000")
    if oracle_steps < 10_000:
        raise ValueError("oracle_steps must be >= 10000")

    rng = derive_rng(seed, TAG_MONTE_CARLO)
    dev_corrected = 0.0
    dev_printed = 0.0
    done = 0
    while done < samples:
        size = min(_CHUNK, samples - done)
        g1 = sample_uniform_sphere_batch(rng, size)
        g2 = sample_uniform_sphere_batch(rng, size)
        g3 = sample_uniform_sphere_batch(rng, size)
        bad = degenerate_base_mask(g1, g2)
        while bad.any():
            g2[bad] = sample_uniform_sphere_batch(rng, int(bad.sum()))
            bad = degenerate_base_mask(g1, g2)
        oracle = aab_oracle_batch(g3, g1, g2, oracle_steps)
        dev_corrected = max(
            dev_corrected,
            float(np.abs(aab_inconsistency_batch(g3, g1, g2) - oracle).max()),
        )
        dev_printed = max(
            dev_printed,
            float(np.abs(aab_as_printed_batch(g3, g1, g2) - oracle).max()),
        )
        done += size
    return FormulaComparison(
        max_abs_dev_corrected=dev_corrected,
        max_abs_dev_as_printed=dev_printed,
        samples=samples,
        oracle_steps=oracle_steps,
        seed=seed,
    )
