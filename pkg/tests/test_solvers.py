"""Tests of the spectral and robust location solvers and the alignment."""

from __future__ import annotations

import numpy as np
import pytest

from aabscreen.graph import ViewGraph
from aabscreen.solvers import (
    DegenerateInstanceError,
    _assemble,
    align_similarity,
    solve_irls_lud,
    solve_ls_spectral,
)
from aabscreen.synthetic import UCParams, generate_uc

from conftest import complete_graph_from_locations


def aligned_errors(est, gt_locs):
    _, _, aligned = align_similarity(est, gt_locs)
    d = np.array([np.linalg.norm(aligned[v] - gt_locs[v]) for v in aligned])
    return float(d.mean()), float(np.median(d))


def corrupted_k8(seed):
    rng = np.random.default_rng(100 + seed)
    t = rng.normal(size=(8, 3))
    edges = []
    for i in range(8):
        for j in range(i + 1, 8):
            d = t[i] - t[j]
            edges.append([i, j, d / np.linalg.norm(d)])
    for k in rng.choice(len(edges), size=3, replace=False):
        v = rng.normal(size=3)
        edges[k][2] = v / np.linalg.norm(v)
    return ViewGraph(8, [tuple(e) for e in edges]), {v: t[v] for v in range(8)}


class TestSpectral:
    def test_exact_k4_recovery(self, rng):
        t = rng.normal(size=(4, 3))
        g = complete_graph_from_locations(t)
        est = solve_ls_spectral(g)
        mean_err, _ = aligned_errors(est, {v: t[v] for v in range(4)})
        assert mean_err <= 1e-6

    def test_two_vertex_instance(self):
        g = ViewGraph(2, [(0, 1, np.array([0.0, 0.0, 1.0]))])
        est = solve_ls_spectral(g)
        assert est.residuals[(0, 1)] <= 1e-12
        # matches (0, 0, 1/2), (0, 0, -1/2) up to the scale/sign gauge
        target = {0: np.array([0.0, 0.0, 0.5]), 1: np.array([0.0, 0.0, -0.5])}
        _, _, aligned = align_similarity(est, target)
        assert max(np.linalg.norm(aligned[v] - target[v]) for v in (0, 1)) <= 1e-9

    def test_collinear_is_degenerate(self):
        t = np.array([[0.0, 0, 0], [1.0, 0, 0], [2.0, 0, 0]])
        g = complete_graph_from_locations(t)
        with pytest.raises(DegenerateInstanceError):
            solve_ls_spectral(g)

    def test_disconnected_rejected(self):
        g = ViewGraph(
            4,
            [(0, 1, np.array([0.0, 0.0, 1.0])), (2, 3, np.array([0.0, 1.0, 0.0]))],
        )
        with pytest.raises(ValueError, match="connected"):
            solve_ls_spectral(g)

    def test_gauge_fixing(self):
        g, _ = generate_uc(UCParams(n=40, p=0.5, q=0.2, sigma=0.05, seed=3))
        est = solve_ls_spectral(g)
        pts = np.array(list(est.locations.values()))
        assert np.linalg.norm(pts.mean(axis=0)) <= 1e-9
        assert abs((pts**2).sum() - 1.0) <= 1e-9

    def test_objective_equals_sum_of_squared_residuals(self):
        g, _ = generate_uc(UCParams(n=30, p=0.6, q=0.2, sigma=0.05, seed=4))
        est = solve_ls_spectral(g)
        verts = np.array(sorted(est.locations))
        t = np.array([est.locations[v] for v in verts]).ravel()
        a = _assemble(g, verts, None)
        quad = float(t @ a @ t)
        ssq = sum(r * r for r in est.residuals.values())
        assert quad == pytest.approx(ssq, abs=1e-9)

    def test_quadratic_form_matches_direct_sum(self, rng):
        g, _ = generate_uc(UCParams(n=25, p=0.6, q=0.3, sigma=0.1, seed=5))
        verts = g.active_vertices()
        a = _assemble(g, verts, None)
        pos = {int(v): k for k, v in enumerate(verts)}
        x = rng.normal(size=(verts.size, 3))
        direct = 0.0
        for (i, j) in g.edges():
            gam = g.direction(i, j)
            diff = x[pos[i]] - x[pos[j]]
            rej = diff - np.dot(diff, gam) * gam
            direct += float(np.dot(rej, rej))
        quad = float(x.ravel() @ a @ x.ravel())
        assert quad == pytest.approx(direct, abs=1e-9)


class TestIrls:
    def test_exact_k4(self, rng):
        t = rng.normal(size=(4, 3))
        g = complete_graph_from_locations(t)
        est = solve_irls_lud(g)
        mean_err, _ = aligned_errors(est, {v: t[v] for v in range(4)})
        assert mean_err <= 1e-6
        assert est.converged
        assert est.iterations <= 3
        assert all(np.isfinite(r) for r in est.residuals.values())

    def test_robust_to_corrupted_edges(self):
        wins = 0
        for seed in range(10):
            g, gt = corrupted_k8(seed)
            _, med_ls = aligned_errors(solve_ls_spectral(g), gt)
            _, med_ir = aligned_errors(solve_irls_lud(g), gt)
            wins += med_ir < med_ls
        assert wins >= 8

    def test_objective_trace_non_increasing(self):
        g, _ = generate_uc(UCParams(n=40, p=0.5, q=0.3, sigma=0.05, seed=6))
        est = solve_irls_lud(g)
        trace = est.objective_trace
        assert trace, "robust solver records its objective"
        assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))

    def test_validation(self):
        g = ViewGraph(2, [(0, 1, np.array([0.0, 0.0, 1.0]))])
        with pytest.raises(ValueError):
            solve_irls_lud(g, max_iters=0)
        with pytest.raises(ValueError):
            solve_irls_lud(g, delta=0.0)

    def test_degenerate_instance_propagates(self):
        t = np.array([[0.0, 0, 0], [1.0, 0, 0], [2.0, 0, 0]])
        g = complete_graph_from_locations(t)
        with pytest.raises(DegenerateInstanceError):
            solve_irls_lud(g)


class TestAlignment:
    def test_identity(self, rng):
        t = {v: rng.normal(size=3) for v in range(5)}
        s, b, aligned = align_similarity(t, t)
        assert s == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(b) <= 1e-12
        assert all(np.linalg.norm(aligned[v] - t[v]) <= 1e-12 for v in t)

    def test_exact_inverse(self, rng):
        gt = {v: rng.normal(size=3) for v in range(5)}
        est = {v: 2.0 * gt[v] + 1.0 for v in gt}
        s, b, aligned = align_similarity(est, gt)
        assert s == pytest.approx(0.5, abs=1e-12)
        assert np.allclose(b, -0.5, atol=1e-12)
        assert all(np.linalg.norm(aligned[v] - gt[v]) <= 1e-12 for v in gt)

    def test_vertex_mismatch(self, rng):
        gt = {v: rng.normal(size=3) for v in range(3)}
        est = {v: rng.normal(size=3) for v in range(4)}
        with pytest.raises(ValueError, match="reference"):
            align_similarity(est, gt)

    def test_coincident_estimate_rejected(self):
        est = {v: np.zeros(3) for v in range(3)}
        gt = {v: np.ones(3) * v for v in range(3)}
        with pytest.raises(ValueError, match="coincide"):
            align_similarity(est, gt)

    def test_reflection_absorbed(self, rng):
        gt = {v: rng.normal(size=3) for v in range(6)}
        est = {v: -gt[v] for v in gt}
        s, _, aligned = align_similarity(est, gt)
        assert s == pytest.approx(-1.0, abs=1e-12)
        assert all(np.linalg.norm(aligned[v] - gt[v]) <= 1e-12 for v in gt)

    def test_gauge_invariance_of_errors(self, rng):
        t = rng.normal(size=(5, 3))
        g = complete_graph_from_locations(t)
        est = solve_ls_spectral(g)
        gt1 = {v: t[v] for v in range(5)}
        gt2 = {v: 3.5 * t[v] + np.array([1.0, -2.0, 0.5]) for v in range(5)}
        e1 = aligned_errors(est, gt1)[0]
        e2 = aligned_errors(est, gt2)[0] / 3.5
        assert e1 == pytest.approx(e2, abs=1e-9)
