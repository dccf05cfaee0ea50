"""Text file formats for graphs, locations, statistics, and labels.

All formats are line-oriented ASCII with '#' comment lines; the first line
is a versioned header.  Floats are written with 17 significant digits so a
round trip preserves the value to the last bit before renormalization.
Writers go through a temp file and an atomic rename: a failed run never
leaves a partial output behind.
"""

from __future__ import annotations

import json
import os
from typing import Iterable, Mapping

import numpy as np

from .aabstats import EdgeStatistics
from .evaluation import EdgeLabels, HistogramCounts, RocCurve
from .graph import ViewGraph

__all__ = [
    "FileFormatError",
    "write_edge_list",
    "parse_edge_list",
    "write_locations",
    "parse_locations",
    "write_statistics",
    "parse_statistics",
    "write_labels",
    "parse_labels",
    "write_roc_csv",
    "write_histogram_csv",
    "write_json_report",
]

_EDGE_HEADER = "# aab-edges v1"
_LOC_HEADER = "# aab-locations v1"
_STAT_HEADER = "# aab-stats v1"
_LABEL_HEADER = "# aab-labels v1"

_NORM_REJECT_TOL = 1e-6


class FileFormatError(ValueError):
    """Malformed input file; the message carries path and line number."""


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _atomic_write(path: str, lines: Iterable[str]) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    try:
        with open(tmp, "w", encoding="ascii") as fh:
            for line in lines:
                fh.write(line)
                fh.write("\n")
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def _metadata_lines(metadata: Mapping[str, object] | None) -> list[str]:
    if not metadata:
        return []
    return [f"# {key}={metadata[key]}" for key in metadata]


class _Reader:
    """Line iterator with error context; skips blank and comment lines."""

    def __init__(self, path: str):
        self.path = path
        with open(path, "r", encoding="ascii") as fh:
            self.lines = fh.read().splitlines()

    def fail(self, lineno: int, msg: str):
        raise FileFormatError(f"{self.path}:{lineno}: {msg}")

    def check_header(self, expected: str):
        if not self.lines or not self.lines[0].startswith(expected):
            raise FileFormatError(f"{self.path}:1: expected header {expected!r}")
        try:
            n = int(self.lines[0].split("n=")[1].split()[0])
        except (IndexError, ValueError):
            raise FileFormatError(f"{self.path}:1: header is missing n=<count>") from None
        return n

    def data_lines(self):
        for lineno, line in enumerate(self.lines[1:], start=2):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            yield lineno, stripped


# -- edge lists --------------------------------------------------------------


def write_edge_list(g: ViewGraph, path: str, metadata: Mapping[str, object] | None = None) -> None:
    """Write "i j gx gy gz" lines in canonical order."""
    lines = [f"{_EDGE_HEADER} n={g.n}"]
    lines += _metadata_lines(metadata)
    for (i, j), d in zip(g.edge_array, g.direction_array):
        lines.append(f"{i} {j} {_fmt(d[0])} {_fmt(d[1])} {_fmt(d[2])}")
    _atomic_write(path, lines)


def parse_edge_list(path: str) -> ViewGraph:
    """Read a view graph, validating ids, uniqueness, and direction norms."""
    rd = _Reader(path)
    n = rd.check_header(_EDGE_HEADER)
    edges = []
    seen = set()
    for lineno, line in rd.data_lines():
        parts = line.split()
        if len(parts) != 5:
            rd.fail(lineno, f"expected 5 fields, got {len(parts)}")
        try:
            i, j = int(parts[0]), int(parts[1])
            d = np.array([float(parts[2]), float(parts[3]), float(parts[4])])
        except ValueError:
            rd.fail(lineno, "could not parse vertex ids or direction components")
        if i >= j:
            rd.fail(lineno, f"edge ({i}, {j}) violates i < j")
        if not (0 <= i < n and j < n):
            rd.fail(lineno, f"vertex pair ({i}, {j}) out of range for n={n}")
        if (i, j) in seen:
            rd.fail(lineno, f"duplicate edge ({i}, {j})")
        seen.add((i, j))
        norm = float(np.linalg.norm(d))
        if abs(norm - 1.0) > _NORM_REJECT_TOL:
            rd.fail(lineno, f"direction norm {norm!r} deviates from 1 by more than {_NORM_REJECT_TOL}")
        edges.append((i, j, d / norm))
    return ViewGraph(n, edges)


# -- locations ---------------------------------------------------------------


def write_locations(
    locations: Mapping[int, np.ndarray],
    n: int,
    path: str,
    metadata: Mapping[str, object] | None = None,
) -> None:
    lines = [f"{_LOC_HEADER} n={n}"]
    lines += _metadata_lines(metadata)
    for v in sorted(locations):
        t = locations[v]
        lines.append(f"{v} {_fmt(t[0])} {_fmt(t[1])} {_fmt(t[2])}")
    _atomic_write(path, lines)


def parse_locations(path: str) -> tuple[dict[int, np.ndarray], int]:
    rd = _Reader(path)
    n = rd.check_header(_LOC_HEADER)
    locs: dict[int, np.ndarray] = {}
    for lineno, line in rd.data_lines():
        parts = line.split()
        if len(parts) != 4:
            rd.fail(lineno, f"expected 4 fields, got {len(parts)}")
        try:
            v = int(parts[0])
            t = np.array([float(parts[1]), float(parts[2]), float(parts[3])])
        except ValueError:
            rd.fail(lineno, "could not parse vertex id or coordinates")
        if not 0 <= v < n:
            rd.fail(lineno, f"vertex {v} out of range for n={n}")
        if v in locs:
            rd.fail(lineno, f"vertex {v} appears more than once")
        locs[v] = t
    return locs, n


# -- statistics --------------------------------------------------------------


def write_statistics(
    g: ViewGraph,
    stats: EdgeStatistics,
    path: str,
    metadata: Mapping[str, object] | None = None,
) -> None:
    """One row per edge of ``g``: "i,j,statistic,unsupported"."""
    lines = [f"{_STAT_HEADER} n={g.n}"]
    lines += _metadata_lines(metadata)
    lines.append("i,j,statistic,unsupported")
    for edge in g.edges():
        i, j = edge
        if edge in stats.unsupported:
            lines.append(f"{i},{j},nan,1")
        else:
            lines.append(f"{i},{j},{_fmt(stats.values[edge])},0")
    _atomic_write(path, lines)


def parse_statistics(path: str) -> EdgeStatistics:
    rd = _Reader(path)
    rd.check_header(_STAT_HEADER)
    values: dict[tuple[int, int], float] = {}
    unsupported: set[tuple[int, int]] = set()
    edges: list[tuple[int, int]] = []
    for lineno, line in rd.data_lines():
        if line == "i,j,statistic,unsupported":
            continue
        parts = line.split(",")
        if len(parts) != 4:
            rd.fail(lineno, f"expected 4 columns, got {len(parts)}")
        try:
            i, j = int(parts[0]), int(parts[1])
            flag = int(parts[3])
        except ValueError:
            rd.fail(lineno, "could not parse row")
        edge = (i, j)
        if edge in values or edge in unsupported:
            rd.fail(lineno, f"duplicate edge {edge}")
        edges.append(edge)
        if flag:
            unsupported.add(edge)
        else:
            try:
                values[edge] = float(parts[2])
            except ValueError:
                rd.fail(lineno, "could not parse statistic value")
    return EdgeStatistics(edges=edges, values=values, unsupported=unsupported)


# -- labels ------------------------------------------------------------------


def write_labels(
    g: ViewGraph,
    labels: EdgeLabels,
    path: str,
    metadata: Mapping[str, object] | None = None,
) -> None:
    lines = [f"{_LABEL_HEADER} n={g.n}"]
    lines += _metadata_lines(metadata)
    lines.append("i,j,angle,corrupted")
    for edge in g.edges():
        i, j = edge
        lines.append(f"{i},{j},{_fmt(labels.angle[edge])},{int(labels.corrupted[edge])}")
    _atomic_write(path, lines)


def parse_labels(path: str) -> EdgeLabels:
    rd = _Reader(path)
    rd.check_header(_LABEL_HEADER)
    angle: dict[tuple[int, int], float] = {}
    corrupted: dict[tuple[int, int], bool] = {}
    for lineno, line in rd.data_lines():
        if line == "i,j,angle,corrupted":
            continue
        parts = line.split(",")
        if len(parts) != 4:
            rd.fail(lineno, f"expected 4 columns, got {len(parts)}")
        try:
            edge = (int(parts[0]), int(parts[1]))
            angle[edge] = float(parts[2])
            corrupted[edge] = bool(int(parts[3]))
        except ValueError:
            rd.fail(lineno, "could not parse row")
    return EdgeLabels(angle=angle, corrupted=corrupted, generator_corrupted=None)


# -- evaluation outputs (write-only) ------------------------------------------


def write_roc_csv(roc: RocCurve, path: str, metadata: Mapping[str, object] | None = None) -> None:
    lines = ["# aab-roc v1"]
    lines += _metadata_lines(metadata)
    lines.append("threshold,fpr,tpr")
    for thr, fpr, tpr in zip(roc.thresholds, roc.fpr, roc.tpr):
        lines.append(f"{_fmt(thr)},{_fmt(fpr)},{_fmt(tpr)}")
    lines.append(f"# auc={'NA' if roc.auc is None else _fmt(roc.auc)}")
    _atomic_write(path, lines)


def write_histogram_csv(
    hist: HistogramCounts, path: str, metadata: Mapping[str, object] | None = None
) -> None:
    lines = ["# aab-hist v1"]
    lines += _metadata_lines(metadata)
    lines.append("bin_left,bin_right,corrupted,uncorrupted")
    for k in range(hist.corrupted.size):
        lines.append(
            f"{_fmt(hist.bin_edges[k])},{_fmt(hist.bin_edges[k + 1])},"
            f"{int(hist.corrupted[k])},{int(hist.uncorrupted[k])}"
        )
    _atomic_write(path, lines)


def write_json_report(payload: dict, path: str) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    _atomic_write(path, [text])
