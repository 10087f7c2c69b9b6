"""Weighted undirected co-occurrence network for one time window.

Nodes are technology terms (lexicon hits) and document tags; an edge exists
between two items iff they appear together in at least one document, with
weight = the number of such documents. Node and edge listings are kept in
canonical sorted order so that every downstream computation and every export
is deterministic.
"""

from __future__ import annotations

import itertools
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path

from .corpus import Corpus
from .errors import GraphError
from .fileio import atomic_write_bytes, atomic_write_text
from .lexicon import TermLexicon, extract_terms

KIND_TECHNOLOGY = "technology"
KIND_TAG = "tag"

FIELD_CHOICES = ("text", "tags", "both")
PAIR_CHOICES = ("all", "tech-tag")


@dataclass(frozen=True)
class GraphNode:
    name: str
    kind: str
    doc_frequency: int


@dataclass(frozen=True)
class GraphEdge:
    u: str
    v: str
    weight: int


@dataclass(frozen=True)
class CoGraph:
    """Immutable weighted undirected graph; nodes sorted by name, edges by (u, v)."""

    nodes: tuple[GraphNode, ...] = ()
    edges: tuple[GraphEdge, ...] = ()

    def __post_init__(self) -> None:
        names = [n.name for n in self.nodes]
        if sorted(names) != names or len(set(names)) != len(names):
            raise GraphError("graph nodes must be unique and sorted by name")
        for node in self.nodes:
            if node.kind not in (KIND_TECHNOLOGY, KIND_TAG):
                raise GraphError(f"node {node.name!r}: unknown kind {node.kind!r}")
            if node.doc_frequency < 0:
                raise GraphError(f"node {node.name!r}: negative doc_frequency")
        name_set = set(names)
        pairs = [(e.u, e.v) for e in self.edges]
        if sorted(pairs) != pairs or len(set(pairs)) != len(pairs):
            raise GraphError("graph edges must be unique and sorted by (u, v)")
        for edge in self.edges:
            if edge.u >= edge.v:
                raise GraphError(f"edge ({edge.u!r}, {edge.v!r}): endpoints must satisfy u < v (no self-loops)")
            if edge.u not in name_set or edge.v not in name_set:
                raise GraphError(f"edge ({edge.u!r}, {edge.v!r}): endpoint not in node set")
            if edge.weight < 1:
                raise GraphError(f"edge ({edge.u!r}, {edge.v!r}): weight must be >= 1")

    def node_names(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.nodes)

    def total_weight(self) -> int:
        return sum(e.weight for e in self.edges)

    def adjacency(self) -> dict[str, dict[str, int]]:
        adj: dict[str, dict[str, int]] = {n.name: {} for n in self.nodes}
        for e in self.edges:
            adj[e.u][e.v] = e.weight
            adj[e.v][e.u] = e.weight
        return adj


def _document_items(doc, lexicon: TermLexicon, field: str) -> set[str]:
    items: set[str] = set()
    if field in ("text", "both"):
        items |= extract_terms(doc, lexicon)
    if field in ("tags", "both"):
        items |= set(doc.tags)
    return items


def build_cooccurrence(corpus: Corpus, lexicon: TermLexicon, field: str = "both", pairs: str = "all") -> CoGraph:
    """Accumulate the co-occurrence network over a corpus.

    Per document the item set is (extracted terms) | (tags) depending on
    ``field``; every unordered pair in that set adds 1 to its edge weight.
    A name that is both a tag and a lexicon canonical term is one node with
    kind=technology. ``pairs="tech-tag"`` keeps only technology-tag edges.
    """
    if field not in FIELD_CHOICES:
        raise GraphError(f"field must be one of {FIELD_CHOICES}, got {field!r}")
    if pairs not in PAIR_CHOICES:
        raise GraphError(f"pairs must be one of {PAIR_CHOICES}, got {pairs!r}")
    canonical = lexicon.canonical_terms
    doc_frequency: dict[str, int] = {}
    weights: dict[tuple[str, str], int] = {}
    for doc in corpus.documents:
        items = _document_items(doc, lexicon, field)
        for item in items:
            doc_frequency[item] = doc_frequency.get(item, 0) + 1
        for u, v in itertools.combinations(sorted(items), 2):
            if pairs == "tech-tag" and (u in canonical) == (v in canonical):
                continue
            weights[(u, v)] = weights.get((u, v), 0) + 1
    nodes = tuple(
        GraphNode(name=name, kind=KIND_TECHNOLOGY if name in canonical else KIND_TAG, doc_frequency=doc_frequency[name])
        for name in sorted(doc_frequency)
    )
    edges = tuple(GraphEdge(u=u, v=v, weight=w) for (u, v), w in sorted(weights.items()))
    return CoGraph(nodes=nodes, edges=edges)


def top_n_filter(graph: CoGraph, n: int) -> CoGraph:
    """Keep the n nodes with highest doc_frequency (ties: lexicographic, lower kept)."""
    if n < 1:
        raise GraphError(f"top_n must be >= 1, got {n}")
    if len(graph.nodes) <= n:
        return graph
    ranked = sorted(graph.nodes, key=lambda node: (-node.doc_frequency, node.name))
    keep = {node.name for node in ranked[:n]}
    nodes = tuple(node for node in graph.nodes if node.name in keep)
    edges = tuple(edge for edge in graph.edges if edge.u in keep and edge.v in keep)
    return CoGraph(nodes=nodes, edges=edges)


# GraphML key ids are fixed so exports are byte-stable.
_GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"
_KEYS = (
    ("d_kind", "node", "kind", "string"),
    ("d_freq", "node", "doc_frequency", "int"),
    ("d_cluster", "node", "cluster", "int"),
    ("d_weight", "edge", "weight", "int"),
)


def export_graphml(graph: CoGraph, path: str | Path, assignment: dict[str, int] | None = None) -> None:
    """Write GraphML with kind/doc_frequency/cluster node attributes and weight edges."""
    root = ET.Element("graphml", xmlns=_GRAPHML_NS)
    for key_id, domain, name, attr_type in _KEYS:
        ET.SubElement(root, "key", attrib={"id": key_id, "for": domain, "attr.name": name, "attr.type": attr_type})
    graph_el = ET.SubElement(root, "graph", edgedefault="undirected")
    for node in graph.nodes:
        node_el = ET.SubElement(graph_el, "node", id=node.name)
        ET.SubElement(node_el, "data", key="d_kind").text = node.kind
        ET.SubElement(node_el, "data", key="d_freq").text = str(node.doc_frequency)
        if assignment is not None and node.name in assignment:
            ET.SubElement(node_el, "data", key="d_cluster").text = str(assignment[node.name])
    for edge in graph.edges:
        edge_el = ET.SubElement(graph_el, "edge", source=edge.u, target=edge.v)
        ET.SubElement(edge_el, "data", key="d_weight").text = str(edge.weight)
    ET.indent(root)
    payload = ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"
    atomic_write_bytes(path, payload)


def import_graphml(path: str | Path) -> tuple[CoGraph, dict[str, int] | None]:
    """Read back a graph written by export_graphml; returns (graph, cluster map or None)."""
    path = Path(path)
    if not path.exists():
        raise GraphError(f"graphml file not found: {path}")
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as exc:
        raise GraphError(f"{path.name}: invalid XML ({exc})") from None

    def tag(name: str) -> str:
        return f"{{{_GRAPHML_NS}}}{name}"

    key_names = {}
    for key_el in root.findall(tag("key")):
        key_names[key_el.get("id")] = key_el.get("attr.name")
    graph_el = root.find(tag("graph"))
    if graph_el is None:
        raise GraphError(f"{path.name}: no <graph> element")
    nodes = []
    assignment: dict[str, int] = {}
    for node_el in graph_el.findall(tag("node")):
        name = node_el.get("id")
        attrs: dict[str, str] = {}
        for data_el in node_el.findall(tag("data")):
            attrs[key_names.get(data_el.get("key"), "")] = data_el.text or ""
        if name is None or "kind" not in attrs or "doc_frequency" not in attrs:
            raise GraphError(f"{path.name}: node missing id/kind/doc_frequency")
        nodes.append(GraphNode(name=name, kind=attrs["kind"], doc_frequency=int(attrs["doc_frequency"])))
        if "cluster" in attrs:
            assignment[name] = int(attrs["cluster"])
    edges = []
    for edge_el in graph_el.findall(tag("edge")):
        u, v = edge_el.get("source"), edge_el.get("target")
        weight = 1
        for data_el in edge_el.findall(tag("data")):
            if key_names.get(data_el.get("key")) == "weight":
                weight = int(data_el.text or "1")
        if u is None or v is None:
            raise GraphError(f"{path.name}: edge missing endpoints")
        edges.append(GraphEdge(u=u, v=v, weight=weight))
    graph = CoGraph(nodes=tuple(sorted(nodes, key=lambda n: n.name)), edges=tuple(sorted(edges, key=lambda e: (e.u, e.v))))
    return graph, (assignment or None)


def export_graph_json(graph: CoGraph, path: str | Path) -> None:
    """Write the graph as JSON mirroring the CoGraph fields."""
    payload = {
        "nodes": [{"name": n.name, "kind": n.kind, "doc_frequency": n.doc_frequency} for n in graph.nodes],
        "edges": [{"u": e.u, "v": e.v, "weight": e.weight} for e in graph.edges],
    }
    atomic_write_text(path, json.dumps(payload, indent=2, ensure_ascii=False) + "\n")


def import_graph_json(path: str | Path) -> CoGraph:
    path = Path(path)
    if not path.exists():
        raise GraphError(f"graph json file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GraphError(f"{path.name}: invalid JSON ({exc.msg})") from None
    if not isinstance(payload, dict) or "nodes" not in payload or "edges" not in payload:
        raise GraphError(f"{path.name}: expected object with 'nodes' and 'edges'")
    nodes = tuple(
        GraphNode(name=str(n["name"]), kind=str(n["kind"]), doc_frequency=int(n["doc_frequency"]))
        for n in payload["nodes"]
    )
    edges = tuple(GraphEdge(u=str(e["u"]), v=str(e["v"]), weight=int(e["weight"])) for e in payload["edges"])
    return CoGraph(nodes=tuple(sorted(nodes, key=lambda n: n.name)), edges=tuple(sorted(edges, key=lambda e: (e.u, e.v))))
