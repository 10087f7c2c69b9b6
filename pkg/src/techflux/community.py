"""Weighted modularity and deterministic Louvain community detection.

The classical Louvain procedure visits nodes in random order, which makes
cluster ids (and everything computed from them) irreproducible. Since the
whole downstream transition analysis compares partitions across windows,
this implementation pins every source of nondeterminism:

* nodes are traversed in fixed orders (lexicographic by name, and by
  descending degree); aggregated supernodes inherit the smallest member
  name as their sort key;
* in the greedy phases a node moves only on strictly positive gain, which
  guarantees termination without cycle detection;
* ties between equally good target communities go to the smallest community
  id;
* final cluster ids are dense integers assigned by the lexicographically
  smallest member of each cluster.

Greedy local moving is order-sensitive and can stall in poor local optima
on small graphs, so each multilevel descent alternates with a refinement
stage: a greedy fixpoint over single-node moves plus an escape search that
chains forced relocations and keeps the best-scoring prefix. The descent
runs once per traversal order and the higher-quality result wins, with ties
going to the lexicographic sweep. Every stage uses fixed orders and
tie-breaks, so repeated runs on the same graph yield identical partitions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .cograph import CoGraph
from .errors import CommunityError
from .fileio import atomic_write_text

EDGELESS_MSG = "modularity undefined on edgeless graph"


@dataclass(frozen=True)
class Partition:
    """Disjoint assignment of node names to dense 0-based cluster ids."""

    assignment: dict[str, int]
    modularity: float
    cluster_count: int

    def __post_init__(self) -> None:
        if not self.assignment:
            raise CommunityError("partition must assign at least one node")
        if self.cluster_count < 1:
            raise CommunityError("cluster_count must be >= 1")
        for node, cid in self.assignment.items():
            if not isinstance(cid, int) or cid < 0 or cid >= self.cluster_count:
                raise CommunityError(f"node {node!r}: cluster id {cid!r} outside 0..{self.cluster_count - 1}")

    def members(self, cluster_id: int) -> tuple[str, ...]:
        return tuple(sorted(name for name, cid in self.assignment.items() if cid == cluster_id))

    def clusters(self) -> list[tuple[str, ...]]:
        return [self.members(cid) for cid in range(self.cluster_count)]


@dataclass(frozen=True)
class ClusterLabel:
    cluster_id: int
    suggested_label: str
    top_tags: tuple[str, ...]


def modularity(graph: CoGraph, partition: Partition | dict[str, int]) -> float:
    """Weighted Newman modularity of a partition.

    Q = sum over clusters of [ w_in/(2m) - (w_tot/(2m))^2 ], where w_in
    counts each intra-cluster edge's weight twice and w_tot sums the
    weighted degrees of the cluster's nodes.
    """
    assignment = partition.assignment if isinstance(partition, Partition) else partition
    names = set(graph.node_names())
    if set(assignment) != names:
        missing = sorted(names - set(assignment))[:3]
        extra = sorted(set(assignment) - names)[:3]
        raise CommunityError(f"incomplete partition: missing={missing} extra={extra}")
    m = graph.total_weight()
    if m == 0:
        raise CommunityError(EDGELESS_MSG)
    two_m = 2.0 * m
    w_in: dict[int, float] = {}
    w_tot: dict[int, float] = {}
    for node in graph.nodes:
        w_tot.setdefault(assignment[node.name], 0.0)
    for edge in graph.edges:
        cu, cv = assignment[edge.u], assignment[edge.v]
        if cu == cv:
            w_in[cu] = w_in.get(cu, 0.0) + 2.0 * edge.weight
        w_tot[cu] += edge.weight
        w_tot[cv] += edge.weight
    terms = [w_in.get(c, 0.0) / two_m - (w_tot[c] / two_m) ** 2 for c in w_tot]
    return math.fsum(terms)


class _Level:
    """One aggregation level: indexed nodes, adjacency, self-loops, degrees."""

    def __init__(self, sort_keys: list[str], adj: list[dict[int, float]], self_w: list[float]):
        self.sort_keys = sort_keys
        self.adj = adj
        self.self_w = self_w
        self.degree = [sum(nbrs.values()) + 2.0 * self_w[i] for i, nbrs in enumerate(adj)]
        self.m = sum(self.degree) / 2.0

    @property
    def size(self) -> int:
        return len(self.sort_keys)


def _lex_order(level: _Level) -> list[int]:
    return sorted(range(level.size), key=lambda i: level.sort_keys[i])


def _degree_order(level: _Level) -> list[int]:
    return sorted(range(level.size), key=lambda i: (-level.degree[i], level.sort_keys[i]))


def _local_phase(
    level: _Level, resolution: float, order: list[int], com: list[int] | None = None
) -> tuple[list[int], int]:
    """Greedy node moves until no strictly positive gain remains.

    Returns (community label per node, number of moves made). Starts from
    singletons unless an assignment is given; singleton labels are the
    initial node indices, so "smallest community id" is well defined and
    deterministic.
    """
    n = level.size
    com = list(range(n)) if com is None else list(com)
    tot: dict[int, float] = {}
    for i in range(n):
        tot[com[i]] = tot.get(com[i], 0.0) + level.degree[i]
    m = level.m
    total_moves = 0
    while True:
        moves = 0
        for i in order:
            k_i = level.degree[i]
            home = com[i]
            # Link weight from i to each neighboring community.
            links: dict[int, float] = {home: 0.0}
            for j, w in level.adj[i].items():
                links[com[j]] = links.get(com[j], 0.0) + w
            # Detach i, then compare reinsertion gains.
            tot[home] -= k_i
            # Constant-in-target terms (self-loop, -k_i^2) are dropped from the
            # gain; only differences between targets matter. Ascending-id scan
            # with strict > picks the smallest community id among ties, and a
            # tie with the home community means no strictly positive gain, so
            # the node stays.
            best_c = home
            best_gain = links[home] / m - resolution * tot[home] * k_i / (2.0 * m * m)
            for c in sorted(links):
                if c == home:
                    continue
                gain = links[c] / m - resolution * tot[c] * k_i / (2.0 * m * m)
                if gain > best_gain:
                    best_c, best_gain = c, gain
            if best_c != home:
                com[i] = best_c
                tot[best_c] += k_i
                moves += 1
            else:
                tot[home] += k_i
        total_moves += moves
        if moves == 0:
            return com, total_moves


_ESCAPE_MAX_NODES = 512


def _best_move(
    level: _Level, resolution: float, com: list[int], tot: dict[int, float], i: int, fresh: int
) -> tuple[int, float] | None:
    """Best relocation for node i (possibly at a loss) and its quality delta.

    Candidates are the neighboring communities plus, when every alternative
    loses, a fresh singleton. Returns None when the node has no move that
    changes anything. Ascending-label scan with strict > keeps ties
    deterministic.
    """
    m = level.m
    k_i = level.degree[i]
    home = com[i]
    links: dict[int, float] = {}
    for j, w in level.adj[i].items():
        links[com[j]] = links.get(com[j], 0.0) + w
    tot_home = tot[home] - k_i
    home_gain = links.get(home, 0.0) / m - resolution * tot_home * k_i / (2.0 * m * m)
    best_c = None
    best_gain = 0.0
    for c in sorted(links):
        if c == home:
            continue
        gain = links[c] / m - resolution * tot[c] * k_i / (2.0 * m * m)
        if best_c is None or gain > best_gain:
            best_c, best_gain = c, gain
    already_singleton = links.get(home, 0.0) == 0.0 and tot_home == 0.0
    if not already_singleton and (best_c is None or best_gain < 0.0):
        # Detaching into a fresh singleton beats every lossy alternative.
        best_c, best_gain = fresh, 0.0
    if best_c is None:
        return None
    return best_c, best_gain - home_gain


def _escape_round(
    level: _Level, resolution: float, order: list[int], com: list[int]
) -> tuple[list[int], bool]:
    """One escape round: chained forced moves with best-prefix acceptance.

    Repeatedly applies the single best relocation over all not-yet-moved
    nodes, even when it loses quality, locking each moved node. The longest
    prefix of the move chain with the largest cumulative gain is kept if
    that gain is strictly positive. This recovers optima that need short
    coordinated move sequences, which the one-node-at-a-time greedy phase
    cannot reach. Quadratic in node count, so it is skipped on levels too
    large for that to be cheap. Fully deterministic: traversal-order
    tie-breaks between nodes, ascending-label tie-breaks between targets.
    """
    if level.size > _ESCAPE_MAX_NODES:
        return com, False
    work = list(com)
    tot: dict[int, float] = {}
    for i in range(level.size):
        tot[work[i]] = tot.get(work[i], 0.0) + level.degree[i]
    next_fresh = max(work) + 1
    unlocked = list(order)
    cum = 0.0
    best_cum = 0.0
    best_len = 0
    trail: list[tuple[int, int]] = []
    while unlocked:
        pick = None
        pick_move = None
        for i in unlocked:
            move = _best_move(level, resolution, work, tot, i, next_fresh)
            if move is not None and (pick_move is None or move[1] > pick_move[1]):
                pick, pick_move = i, move
        if pick is None:
            break
        target, delta = pick_move
        if target == next_fresh:
            next_fresh += 1
        tot[work[pick]] -= level.degree[pick]
        work[pick] = target
        tot[target] = tot.get(target, 0.0) + level.degree[pick]
        unlocked.remove(pick)
        cum += delta
        trail.append((pick, target))
        if cum > best_cum + 1e-12:
            best_cum = cum
            best_len = len(trail)
    if best_len == 0:
        return com, False
    result = list(com)
    for i, c in trail[:best_len]:
        result[i] = c
    return result, True


def _refine(
    level: _Level, resolution: float, order: list[int], com: list[int]
) -> tuple[list[int], bool]:
    """Greedy fixpoint plus escape rounds until neither improves the assignment."""
    changed = False
    while True:
        com, moves = _local_phase(level, resolution, order, com)
        if moves:
            changed = True
        com, improved = _escape_round(level, resolution, order, com)
        if not improved:
            return com, changed
        changed = True


def _aggregate(level: _Level, com: list[int]) -> tuple[_Level, dict[int, int]]:
    """Collapse communities into supernodes; intra-community weight becomes a self-loop."""
    present = sorted(set(com))
    # Supernode sort key = smallest member key, so lexicographic traversal
    # stays meaningful across levels.
    key_of = {c: min(level.sort_keys[i] for i in range(level.size) if com[i] == c) for c in present}
    ordered = sorted(present, key=lambda c: key_of[c])
    new_index = {c: idx for idx, c in enumerate(ordered)}
    adj: list[dict[int, float]] = [{} for _ in ordered]
    self_w = [0.0] * len(ordered)
    for i in range(level.size):
        ci = new_index[com[i]]
        self_w[ci] += level.self_w[i]
        for j, w in level.adj[i].items():
            if j <= i:
                continue
            cj = new_index[com[j]]
            if ci == cj:
                self_w[ci] += w
            else:
                adj[ci][cj] = adj[ci].get(cj, 0.0) + w
                adj[cj][ci] = adj[cj].get(ci, 0.0) + w
    return _Level([key_of[c] for c in ordered], adj, self_w), new_index


def _multilevel_from(level: _Level, resolution: float, order_fn, com: list[int]) -> list[int]:
    """Continue the multilevel descent from an existing assignment.

    Aggregates the given communities into supernodes, then alternates greedy
    supernode moves and further aggregation until a phase makes no move.
    Returns, for each node of the input level, an integer label of its final
    community.
    """
    level_now, new_index = _aggregate(level, com)
    node_com = [new_index[c] for c in com]
    while True:
        moved, moves = _local_phase(level_now, resolution, order_fn(level_now))
        if moves == 0:
            return node_com
        level_now, new_index = _aggregate(level_now, moved)
        node_com = [new_index[moved[c]] for c in node_com]


def _descend(level: _Level, resolution: float, order_fn) -> list[int]:
    """One full clustering pass: multilevel descent alternating with refinement.

    The multilevel stage guarantees no whole-community merge can improve the
    result; the refinement stage guarantees no single node move or short
    coordinated sequence can. Iterating both to a joint fixpoint keeps each
    guarantee in the final assignment.
    """
    com = list(range(level.size))
    while True:
        com = _multilevel_from(level, resolution, order_fn, com)
        com, changed = _refine(level, resolution, order_fn(level), com)
        if not changed:
            return com


def _dense_assignment(names: list[str], node_com: list[int]) -> dict[str, int]:
    """Relabel communities with dense ids ordered by smallest member name."""
    reps: dict[int, str] = {}
    for i, name in enumerate(names):
        c = node_com[i]
        if c not in reps or name < reps[c]:
            reps[c] = name
    final_id = {c: idx for idx, (_, c) in enumerate(sorted((rep, c) for c, rep in reps.items()))}
    return {name: final_id[node_com[i]] for i, name in enumerate(names)}


def _gamma_quality(graph: CoGraph, assignment: dict[str, int], resolution: float) -> float:
    """Resolution-weighted quality of a node assignment, used to compare sweeps."""
    m = float(graph.total_weight())
    degree: dict[str, float] = {}
    w_in: dict[int, float] = {}
    for edge in graph.edges:
        w = float(edge.weight)
        degree[edge.u] = degree.get(edge.u, 0.0) + w
        degree[edge.v] = degree.get(edge.v, 0.0) + w
        if assignment[edge.u] == assignment[edge.v]:
            c = assignment[edge.u]
            w_in[c] = w_in.get(c, 0.0) + w
    tot: dict[int, float] = {}
    for name in graph.node_names():
        c = assignment[name]
        tot[c] = tot.get(c, 0.0) + degree.get(name, 0.0)
    return sum(
        w_in.get(c, 0.0) / m - resolution * (t / (2.0 * m)) ** 2
        for c, t in sorted(tot.items())
    )


def louvain(graph: CoGraph, resolution: float = 1.0) -> Partition:
    """Multilevel modularity maximization with refinement, fully deterministic.

    Greedy local moving is sensitive to traversal order, so the full descent
    (multilevel passes alternating with refinement) runs twice, once in
    lexicographic node order and once in descending-degree order, and the
    higher-quality result wins (ties go to the lexicographic sweep).
    Isolated nodes end up in singleton clusters and contribute 0 to
    modularity. The reported modularity is always the standard measure, even
    when a different resolution steered the optimization.
    """
    if resolution <= 0:
        raise CommunityError(f"resolution must be positive, got {resolution}")
    if graph.total_weight() == 0:
        raise CommunityError(EDGELESS_MSG)
    names = list(graph.node_names())
    index = {name: i for i, name in enumerate(names)}
    adj: list[dict[int, float]] = [{} for _ in names]
    for edge in graph.edges:
        iu, iv = index[edge.u], index[edge.v]
        adj[iu][iv] = float(edge.weight)
        adj[iv][iu] = float(edge.weight)
    level = _Level(list(names), adj, [0.0] * len(names))
    best: tuple[float, dict[str, int]] | None = None
    for order_fn in (_lex_order, _degree_order):
        assignment = _dense_assignment(names, _descend(level, resolution, order_fn))
        quality = _gamma_quality(graph, assignment, resolution)
        if best is None or quality > best[0]:
            best = (quality, assignment)
    assignment = best[1]
    cluster_count = max(assignment.values()) + 1
    part = Partition(assignment=assignment, modularity=0.0, cluster_count=cluster_count)
    q = modularity(graph, part)
    return Partition(assignment=assignment, modularity=q, cluster_count=cluster_count)


def suggest_labels(graph: CoGraph, partition: Partition) -> list[ClusterLabel]:
    """Per cluster: up to 5 members by intra-cluster weighted degree, ties lexicographic."""
    names = set(graph.node_names())
    if set(partition.assignment) != names:
        raise CommunityError("partition does not cover exactly the graph's nodes")
    intra: dict[str, float] = {name: 0.0 for name in names}
    for edge in graph.edges:
        if partition.assignment[edge.u] == partition.assignment[edge.v]:
            intra[edge.u] += edge.weight
            intra[edge.v] += edge.weight
    labels = []
    for cid in range(partition.cluster_count):
        members = partition.members(cid)
        ranked = sorted(members, key=lambda name: (-intra[name], name))
        top = tuple(ranked[:5])
        labels.append(ClusterLabel(cluster_id=cid, suggested_label=top[0], top_tags=top))
    return labels


def partition_to_json(partition: Partition) -> str:
    payload = {
        "assignment": dict(sorted(partition.assignment.items())),
        "modularity": partition.modularity,
        "cluster_count": partition.cluster_count,
    }
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def export_partition_json(partition: Partition, path) -> None:
    atomic_write_text(path, partition_to_json(partition))
