"""Independent reference computations used by the tests.

Everything here is deliberately written from first principles, with a
different formulation than the package code, so agreement between the two
is meaningful. The statistical references lean on numpy/scipy, which the
package itself does not use for these quantities.
"""

from __future__ import annotations

import random

import numpy as np

from techflux.cograph import CoGraph, GraphEdge, GraphNode


def make_graph(edge_list, extra_nodes=(), kind="tag"):
    """CoGraph from (u, v, weight) triples, without hand-sorting anything."""
    weights = {}
    names = set(extra_nodes)
    for u, v, w in edge_list:
        a, b = (u, v) if u < v else (v, u)
        weights[(a, b)] = weights.get((a, b), 0) + w
        names.update((a, b))
    nodes = tuple(GraphNode(name=n, kind=kind, doc_frequency=1) for n in sorted(names))
    edges = tuple(GraphEdge(u=a, v=b, weight=w) for (a, b), w in sorted(weights.items()))
    return CoGraph(nodes=nodes, edges=edges)


def set_partitions(items):
    """Every partition of items into nonempty blocks (Bell-number many)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [part[i] + [first]] + part[i + 1:]
        yield part + [[first]]


def modularity_pairsum(graph: CoGraph, assignment: dict[str, int]) -> float:
    """Q as the ordered-pair sum (1/2m) sum_ij (A_ij - k_i k_j / 2m) [c_i = c_j]."""
    m = float(graph.total_weight())
    adj = graph.adjacency()
    degree = {n: float(sum(adj[n].values())) for n in adj}
    total = 0.0
    for i in adj:
        for j in adj:
            if assignment[i] != assignment[j]:
                continue
            a_ij = float(adj[i].get(j, 0))
            total += a_ij - degree[i] * degree[j] / (2.0 * m)
    return total / (2.0 * m)


def best_partition_bruteforce(graph: CoGraph) -> tuple[float, list[list[str]]]:
    """Exhaustive modularity maximum over all set partitions of the nodes."""
    names = list(graph.node_names())
    best_q = -float("inf")
    best_blocks: list[list[str]] = []
    for blocks in set_partitions(names):
        assignment = {}
        for cid, block in enumerate(blocks):
            for name in block:
                assignment[name] = cid
        q = modularity_pairsum(graph, assignment)
        if q > best_q:
            best_q = q
            best_blocks = [sorted(b) for b in blocks]
    return best_q, best_blocks


def random_connected_graph(rng: random.Random, max_nodes: int = 8) -> CoGraph:
    """Seeded connected weighted graph with 4..max_nodes nodes."""
    n = rng.randint(4, max_nodes)
    names = [f"n{i}" for i in range(n)]
    order = names[:]
    rng.shuffle(order)
    edges = {}
    for i in range(1, n):
        a = order[i]
        b = order[rng.randrange(i)]
        u, v = (a, b) if a < b else (b, a)
        edges[(u, v)] = rng.randint(1, 5)
    extra = rng.randint(0, n)
    for _ in range(extra):
        a, b = rng.sample(names, 2)
        u, v = (a, b) if a < b else (b, a)
        edges[(u, v)] = rng.randint(1, 5)
    return make_graph([(u, v, w) for (u, v), w in edges.items()])


def ols_ssr_reference(x, y) -> float:
    design = np.column_stack([np.ones(len(x)), np.asarray(x, dtype=float)])
    target = np.asarray(y, dtype=float)
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    resid = target - design @ coef
    return float(resid @ resid)


def chow_reference(x, y, breakpoint_index: int):
    """(F, p) by plain numpy least squares plus scipy's F survival function."""
    from scipy import stats

    k = 2
    ssr_pooled = ols_ssr_reference(x, y)
    ssr_1 = ols_ssr_reference(x[:breakpoint_index], y[:breakpoint_index])
    ssr_2 = ols_ssr_reference(x[breakpoint_index:], y[breakpoint_index:])
    segmented = ssr_1 + ssr_2
    df2 = len(x) - 2 * k
    if segmented == 0.0:
        if ssr_pooled == 0.0:
            return 0.0, 1.0
        return float("inf"), 0.0
    f_stat = ((ssr_pooled - segmented) / k) / (segmented / df2)
    return f_stat, float(stats.f.sf(f_stat, k, df2))
