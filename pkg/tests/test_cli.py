"""End-to-end tests of the command-line pipeline."""

from __future__ import annotations

import json

import pytest

from aabscreen.cli import main


def run(*args):
    return main([str(a) for a in args])


@pytest.fixture
def generated(tmp_path):
    paths = {
        "edges": tmp_path / "edges.txt",
        "locations": tmp_path / "locations.txt",
        "labels": tmp_path / "labels.csv",
    }
    code = run(
        "generate",
        "--n", 60, "--p", 0.5, "--q", 0.2, "--sigma", 0.0, "--seed", 5,
        "--out-edges", paths["edges"],
        "--out-locations", paths["locations"],
        "--out-labels", paths["labels"],
    )
    assert code == 0
    return paths


class TestSubcommands:
    def test_screen_deterministic_bytes(self, generated, tmp_path):
        out1 = tmp_path / "s1.csv"
        out2 = tmp_path / "s2.csv"
        for out in (out1, out2):
            assert run(
                "screen", "--edges", generated["edges"], "--stat", "ir",
                "--seed", 9, "--out", out,
            ) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_filter_rejects_bad_fraction(self, generated, tmp_path):
        stats = tmp_path / "stats.csv"
        assert run(
            "screen", "--edges", generated["edges"], "--stat", "naive",
            "--seed", 9, "--out", stats,
        ) == 0
        code = run(
            "filter", "--edges", generated["edges"], "--stats", stats,
            "--keep-fraction", 0, "--out", tmp_path / "pruned.txt",
        )
        assert code == 2

    def test_missing_file_is_clean_error(self, tmp_path, capsys):
        code = run(
            "screen", "--edges", tmp_path / "nope.txt", "--stat", "naive",
            "--seed", 1, "--out", tmp_path / "out.csv",
        )
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_verify_modes(self, tmp_path):
        for mode, extra in (
            ("z", []),
            ("formula", ["--oracle-steps", "10000"]),
        ):
            out = tmp_path / f"report-{mode}.json"
            assert run(
                "verify", "--mode", mode, "--samples", 2000, "--seed", 3,
                "--out", out, *extra,
            ) == 0
            payload = json.loads(out.read_text())
            assert payload["mode"] == mode

    def test_per_iteration_dump(self, generated, tmp_path):
        out = tmp_path / "stats.csv"
        periter = tmp_path / "periter.csv"
        assert run(
            "screen", "--edges", generated["edges"], "--stat", "ir",
            "--seed", 2, "--out", out, "--per-iteration", periter,
        ) == 0
        lines = periter.read_text().splitlines()
        assert lines[0].startswith("# aab-stats-periter v1")
        assert "t,i,j,value" in lines


class TestFullPipeline:
    def test_six_stages(self, tmp_path):
        edges = tmp_path / "edges.txt"
        locations = tmp_path / "locations.txt"
        labels = tmp_path / "labels.csv"
        stats = tmp_path / "stats.csv"
        pruned = tmp_path / "pruned.txt"
        estimate = tmp_path / "estimate.txt"
        outdir = tmp_path / "eval"

        assert run(
            "generate", "--n", 200, "--p", 0.5, "--q", 0.2, "--sigma", 0.0,
            "--seed", 42, "--out-edges", edges, "--out-locations", locations,
            "--out-labels", labels,
        ) == 0
        assert run(
            "screen", "--edges", edges, "--stat", "ir", "--s", 50, "--T", 10,
            "--seed", 42, "--out", stats,
        ) == 0
        assert run(
            "filter", "--edges", edges, "--stats", stats,
            "--keep-fraction", 0.5, "--min-degree", 2, "--out", pruned,
        ) == 0
        for solver in ("ls", "irls"):
            assert run(
                "solve", "--edges", pruned, "--solver", solver,
                "--out", estimate,
            ) == 0
        assert run(
            "evaluate", "--edges", edges, "--stats", stats, "--labels", labels,
            "--estimate", estimate, "--ground-truth", locations,
            "--out-dir", outdir,
        ) == 0
        assert run(
            "verify", "--mode", "lemma", "--samples", 2000, "--seed", 1,
            "--out", tmp_path / "lemma.json",
        ) == 0

        report = json.loads((outdir / "errors.json").read_text())
        assert report["mean_error"] > 0 and report["mean_error"] < 1
        assert report["median_error"] > 0 and report["median_error"] < 1
        assert (outdir / "roc.csv").exists()
        assert (outdir / "hist.csv").exists()
        roc_text = (outdir / "roc.csv").read_text().splitlines()
        assert roc_text[-1].startswith("# auc=")

    def test_improvement_reported_with_baseline(self, generated, tmp_path):
        stats = tmp_path / "stats.csv"
        estimate = tmp_path / "estimate.txt"
        outdir = tmp_path / "eval"
        assert run(
            "screen", "--edges", generated["edges"], "--stat", "naive",
            "--seed", 1, "--out", stats,
        ) == 0
        assert run(
            "solve", "--edges", generated["edges"], "--solver", "ls",
            "--out", estimate,
        ) == 0
        assert run(
            "evaluate", "--edges", generated["edges"], "--stats", stats,
            "--labels", generated["labels"], "--estimate", estimate,
            "--ground-truth", generated["locations"],
            "--baseline-error", 1.0, "--out-dir", outdir,
        ) == 0
        report = json.loads((outdir / "errors.json").read_text())
        assert "improvement_percent" in report
