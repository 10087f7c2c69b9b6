"""Cluster evolution between two windows.

Given the clustered networks of two adjacent time windows, this module
builds the cluster-overlap similarity matrix, the bipartite bi-adjacency
matrix, per-cluster convergence/novelty indices, and a classified list of
evolution events (birth, death, merge, split, persist). Raw intersection
counts and cluster sizes are kept alongside the normalized similarity
values so flows can be exported exactly.

The default similarity measure divides each intersection by the size of the
later (t+1) cluster; a column sum then equals the fraction of that
cluster's nodes already present anywhere in the earlier window, which is
exactly the convergence index. Jaccard similarity is available for
exploration but the indices are undefined for it.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cograph import CoGraph
from .community import Partition
from .errors import TransitionError
from .fileio import atomic_write_text

MEASURE_OVERLAP_TARGET = "overlap_target"
MEASURE_JACCARD = "jaccard"
MEASURES = (MEASURE_OVERLAP_TARGET, MEASURE_JACCARD)

EVENT_BIRTH = "birth"
EVENT_DEATH = "death"
EVENT_MERGE = "merge"
EVENT_SPLIT = "split"
EVENT_PERSIST = "persist"

_CLAMP_GUARD = 1e-12


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """M x K cluster-overlap matrix between windows t (rows) and t+1 (columns)."""

    row_clusters: tuple[int, ...]
    col_clusters: tuple[int, ...]
    values: np.ndarray
    intersections: np.ndarray
    row_sizes: tuple[int, ...]
    col_sizes: tuple[int, ...]
    measure: str


@dataclass(frozen=True)
class TransitionEvent:
    kind: str
    sources: tuple[int, ...]
    targets: tuple[int, ...]
    supports: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class TransitionReport:
    similarity: SimilarityMatrix
    convergence: dict[int, float]
    novelty: dict[int, float]
    events: tuple[TransitionEvent, ...]
    tau: float


def _cluster_members(partition: Partition, side: str) -> list[set[str]]:
    members: list[set[str]] = [set() for _ in range(partition.cluster_count)]
    for name, cid in partition.assignment.items():
        members[cid].add(name)
    for cid, nodes in enumerate(members):
        if not nodes:
            raise TransitionError(f"empty cluster {cid} in {side} partition")
    return members


def similarity_matrix(
    pair_t: tuple[CoGraph, Partition],
    pair_t1: tuple[CoGraph, Partition],
    measure: str = MEASURE_OVERLAP_TARGET,
) -> SimilarityMatrix:
    """Node-name overlap between every cluster at t and every cluster at t+1."""
    if measure not in MEASURES:
        raise TransitionError(f"unknown similarity measure {measure!r} (expected one of {MEASURES})")
    _, part_t = pair_t
    _, part_t1 = pair_t1
    members_t = _cluster_members(part_t, "window-t")
    members_t1 = _cluster_members(part_t1, "window-t1")
    m, k = len(members_t), len(members_t1)
    inter = np.zeros((m, k), dtype=np.int64)
    for i, vi in enumerate(members_t):
        for j, vj in enumerate(members_t1):
            inter[i, j] = len(vi & vj)
    row_sizes = tuple(len(v) for v in members_t)
    col_sizes = tuple(len(v) for v in members_t1)
    if measure == MEASURE_OVERLAP_TARGET:
        values = inter / np.asarray(col_sizes, dtype=np.float64)[np.newaxis, :]
    else:
        union = np.asarray(row_sizes, dtype=np.float64)[:, np.newaxis] + np.asarray(col_sizes, dtype=np.float64)[np.newaxis, :] - inter
        values = inter / union
    return SimilarityMatrix(
        row_clusters=tuple(range(m)),
        col_clusters=tuple(range(k)),
        values=values,
        intersections=inter,
        row_sizes=row_sizes,
        col_sizes=col_sizes,
        measure=measure,
    )


def biadjacency(matrix: SimilarityMatrix) -> np.ndarray:
    """Square block matrix [[0, S], [S^T, 0]] over the M+K clusters."""
    m, k = matrix.values.shape
    out = np.zeros((m + k, m + k), dtype=np.float64)
    out[:m, m:] = matrix.values
    out[m:, :m] = matrix.values.T
    return out


def inheritance_indices(matrix: SimilarityMatrix) -> tuple[dict[int, float], dict[int, float]]:
    """(convergence, novelty) per t+1 cluster.

    Convergence = the column sum = fraction of the cluster's nodes present
    anywhere in the earlier window; novelty is its complement. Both are
    clamped to [0, 1] after a 1e-12 rounding guard.
    """
    if matrix.measure != MEASURE_OVERLAP_TARGET:
        raise TransitionError("indices defined only for overlap_target")
    convergence: dict[int, float] = {}
    novelty: dict[int, float] = {}
    col_sums = matrix.values.sum(axis=0)
    for j, cid in enumerate(matrix.col_clusters):
        ci = float(col_sums[j])
        if ci < 0.0:
            if ci < -_CLAMP_GUARD:
                raise TransitionError(f"column sum {ci} below 0 for cluster {cid}")
            ci = 0.0
        if ci > 1.0:
            if ci > 1.0 + _CLAMP_GUARD:
                raise TransitionError(f"column sum {ci} above 1 for cluster {cid}")
            ci = 1.0
        convergence[cid] = ci
        novelty[cid] = 1.0 - ci
    return convergence, novelty


def classify_events(matrix: SimilarityMatrix, tau: float) -> list[TransitionEvent]:
    """Read birth/death/merge/split/persist events off the similarity matrix.

    death(i): row i all zero;  birth(j): column j all zero;
    merge(j): >= 2 entries of column j reach tau;
    split(i): >= 2 entries of row i reach tau;
    persist(i -> j): S_ij >= tau and neither merge(j) nor split(i) holds.
    Merge and split are not mutually exclusive.
    """
    if not 0.0 < tau < 1.0:
        raise TransitionError(f"tau must lie in (0, 1), got {tau}")
    values = matrix.values
    m, k = values.shape
    events: list[TransitionEvent] = []
    merged_cols: set[int] = set()
    split_rows: set[int] = set()
    for i in range(m):
        if not values[i, :].any():
            events.append(TransitionEvent(EVENT_DEATH, (matrix.row_clusters[i],), (), ()))
    for j in range(k):
        if not values[:, j].any():
            events.append(TransitionEvent(EVENT_BIRTH, (), (matrix.col_clusters[j],), ()))
    for j in range(k):
        rows = [i for i in range(m) if values[i, j] >= tau]
        if len(rows) >= 2:
            merged_cols.add(j)
            events.append(TransitionEvent(
                EVENT_MERGE,
                tuple(matrix.row_clusters[i] for i in rows),
                (matrix.col_clusters[j],),
                tuple(float(values[i, j]) for i in rows),
            ))
    for i in range(m):
        cols = [j for j in range(k) if values[i, j] >= tau]
        if len(cols) >= 2:
            split_rows.add(i)
            events.append(TransitionEvent(
                EVENT_SPLIT,
                (matrix.row_clusters[i],),
                tuple(matrix.col_clusters[j] for j in cols),
                tuple(float(values[i, j]) for j in cols),
            ))
    for i in range(m):
        for j in range(k):
            if values[i, j] >= tau and j not in merged_cols and i not in split_rows:
                events.append(TransitionEvent(
                    EVENT_PERSIST,
                    (matrix.row_clusters[i],),
                    (matrix.col_clusters[j],),
                    (float(values[i, j]),),
                ))
    return events


def transition_report(
    pair_t: tuple[CoGraph, Partition],
    pair_t1: tuple[CoGraph, Partition],
    tau: float = 0.1,
    measure: str = MEASURE_OVERLAP_TARGET,
) -> TransitionReport:
    """Full comparison of two clustered windows."""
    matrix = similarity_matrix(pair_t, pair_t1, measure)
    if measure == MEASURE_OVERLAP_TARGET:
        convergence, novelty = inheritance_indices(matrix)
    else:
        convergence, novelty = {}, {}
    events = classify_events(matrix, tau)
    return TransitionReport(
        similarity=matrix,
        convergence=convergence,
        novelty=novelty,
        events=tuple(events),
        tau=tau,
    )


def export_similarity_csv(
    matrix: SimilarityMatrix,
    path: str | Path,
    row_labels: list[str] | None = None,
    col_labels: list[str] | None = None,
) -> None:
    """CSV: header = t+1 cluster labels, first column = t cluster labels, 6 decimals."""
    row_labels = row_labels or [str(c) for c in matrix.row_clusters]
    col_labels = col_labels or [str(c) for c in matrix.col_clusters]
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow([""] + list(col_labels))
    for i, label in enumerate(row_labels):
        writer.writerow([label] + [f"{matrix.values[i, j]:.6f}" for j in range(matrix.values.shape[1])])
    atomic_write_text(path, buf.getvalue())


def report_to_json(report: TransitionReport, row_labels: list[str] | None = None, col_labels: list[str] | None = None) -> str:
    matrix = report.similarity
    payload = {
        "measure": matrix.measure,
        "tau": report.tau,
        "clusters_t": list(matrix.row_clusters),
        "clusters_t1": list(matrix.col_clusters),
        "cluster_labels_t": row_labels or [str(c) for c in matrix.row_clusters],
        "cluster_labels_t1": col_labels or [str(c) for c in matrix.col_clusters],
        "cluster_sizes_t": list(matrix.row_sizes),
        "cluster_sizes_t1": list(matrix.col_sizes),
        "similarity": [[float(v) for v in row] for row in matrix.values],
        "intersections": [[int(v) for v in row] for row in matrix.intersections],
        "convergence_index": {str(cid): val for cid, val in sorted(report.convergence.items())},
        "novelty_index": {str(cid): val for cid, val in sorted(report.novelty.items())},
        "events": [
            {"kind": e.kind, "sources": list(e.sources), "targets": list(e.targets), "supports": list(e.supports)}
            for e in report.events
        ],
    }
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def export_report_json(report: TransitionReport, path: str | Path, row_labels=None, col_labels=None) -> None:
    atomic_write_text(path, report_to_json(report, row_labels, col_labels))


def alluvial_export(
    report: TransitionReport,
    labels_t: list[str],
    labels_t1: list[str],
    path: str | Path,
) -> None:
    """Flow table for alluvial/sankey plotting.

    One row per positive cluster overlap, flow weight = shared node count,
    sorted by source cluster size descending, then flow descending.
    """
    matrix = report.similarity
    m, k = matrix.intersections.shape
    if len(labels_t) != m or len(labels_t1) != k:
        raise TransitionError("label lists must match the cluster counts")
    rows = []
    for i in range(m):
        for j in range(k):
            flow = int(matrix.intersections[i, j])
            if flow > 0:
                rows.append((matrix.row_clusters[i], matrix.col_clusters[j], flow, labels_t[i], labels_t1[j], matrix.row_sizes[i]))
    rows.sort(key=lambda r: (-r[5], -r[2], r[0], r[1]))
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["source_cluster", "target_cluster", "flow_weight", "source_label", "target_label"])
    for source, target, flow, slabel, tlabel, _ in rows:
        writer.writerow([source, target, flow, slabel, tlabel])
    atomic_write_text(path, buf.getvalue())
