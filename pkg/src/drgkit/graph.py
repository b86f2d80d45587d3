"""Directed labeled graphs and their JSON-lines interchange format."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Optional

from .exceptions import GraphError, SchemaError

__all__ = [
    "NodeKind",
    "Node",
    "Edge",
    "Drg",
    "to_interchange",
    "from_interchange",
    "read_jsonl",
    "write_jsonl",
    "stats",
    "to_dot",
]

FRAMEWORK = "drg"


class NodeKind(enum.Enum):
    BOX = "Box"
    REFERENT = "Referent"
    CONSTANT = "Constant"
    PREDICATE = "Predicate"
    REIFIED = "Reified"


@dataclass(frozen=True)
class Node:
    id: int
    label: Optional[str] = None
    # matcher/rendering hint only; never serialized and ignored by ==
    kind: Optional[NodeKind] = field(default=None, compare=False)
    anchors: tuple = ()


@dataclass(frozen=True, order=True)
class Edge:
    source: int
    target: int
    label: Optional[str] = None

    def sort_key(self):
        return (self.source, self.target, self.label is not None, self.label or "")


@dataclass(frozen=True)
class Drg:
    """A graph for one document.  ``error`` is set for null graphs."""

    doc_id: str
    encoding: str
    nodes: tuple = ()
    edges: tuple = ()
    tops: tuple = ()
    error: Optional[str] = None

    def __post_init__(self):
        nodes = tuple(sorted(self.nodes, key=lambda n: n.id))
        for i, n in enumerate(nodes):
            if n.id != i:
                raise GraphError(f"{self.doc_id}: node ids must be 0..{len(nodes) - 1}, got {n.id}")
            if n.kind is NodeKind.CONSTANT and not n.label:
                raise GraphError(f"{self.doc_id}: constant node {n.id} has no label")
        edges = tuple(sorted(self.edges, key=Edge.sort_key))
        seen = set()
        for e in edges:
            if not (0 <= e.source < len(nodes) and 0 <= e.target < len(nodes)):
                raise GraphError(f"{self.doc_id}: edge {e} has a missing endpoint")
            if e.source == e.target:
                raise GraphError(f"{self.doc_id}: self-loop on node {e.source}")
            if e in seen:
                raise GraphError(f"{self.doc_id}: parallel edge {e}")
            seen.add(e)
        for t in self.tops:
            if not 0 <= t < len(nodes):
                raise GraphError(f"{self.doc_id}: top {t} is not a node")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "tops", tuple(sorted(set(self.tops))))

    @classmethod
    def null(cls, doc_id, encoding, error):
        return cls(doc_id, encoding, error=str(error))

    @property
    def is_null(self):
        return self.error is not None

    def out_edges(self, node_id):
        return [e for e in self.edges if e.source == node_id]

    def in_edges(self, node_id):
        return [e for e in self.edges if e.target == node_id]

    def is_connected(self):
        """Weak connectivity; the empty graph counts as connected."""
        if not self.nodes:
            return True
        adj = {n.id: set() for n in self.nodes}
        for e in self.edges:
            adj[e.source].add(e.target)
            adj[e.target].add(e.source)
        seen, stack = {0}, [0]
        while stack:
            for m in adj[stack.pop()]:
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        return len(seen) == len(self.nodes)


def _node_json(n):
    out = {"id": n.id}
    if n.label is not None:
        out["label"] = n.label
    if n.anchors:
        out["anchors"] = [{"from": a, "to": b} for a, b in n.anchors]
    return out


def _edge_json(e):
    out = {"source": e.source, "target": e.target}
    if e.label is not None:
        out["label"] = e.label
    return out


def to_interchange(g):
    """Serialize ``g`` as a single JSON line (no trailing newline)."""
    obj = {
        "id": g.doc_id,
        "framework": FRAMEWORK,
        "encoding": g.encoding,
        "tops": list(g.tops),
        "nodes": [_node_json(n) for n in g.nodes],
        "edges": [_edge_json(e) for e in g.edges],
    }
    if g.error is not None:
        obj["error"] = g.error
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def _require(obj, key, path, types):
    if key not in obj:
        raise SchemaError(path, "missing")
    value = obj[key]
    if not isinstance(value, types) or isinstance(value, bool):
        raise SchemaError(path, f"unexpected type {type(value).__name__}")
    return value


def from_interchange(line):
    """Inverse of :func:`to_interchange`; raises :class:`SchemaError`."""
    from .encoding import ENCODINGS

    if isinstance(line, (str, bytes)):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError("$", f"invalid JSON: {exc.msg}") from None
    else:
        obj = line
    if not isinstance(obj, dict):
        raise SchemaError("$", "expected an object")
    doc_id = _require(obj, "id", "id", str)
    framework = obj.get("framework", FRAMEWORK)
    if framework != FRAMEWORK:
        raise SchemaError("framework", f"expected {FRAMEWORK!r}")
    encoding = _require(obj, "encoding", "encoding", str)
    if encoding not in ENCODINGS:
        raise SchemaError("encoding", f"unknown encoding {encoding!r}")
    raw_nodes = _require(obj, "nodes", "nodes", list)
    raw_edges = _require(obj, "edges", "edges", list)
    raw_tops = _require(obj, "tops", "tops", list)
    error = obj.get("error")
    if error is not None and not isinstance(error, str):
        raise SchemaError("error", "expected a string")

    nodes = []
    seen_ids = set()
    for k, rn in enumerate(raw_nodes):
        if not isinstance(rn, dict):
            raise SchemaError(f"nodes[{k}]", "expected an object")
        nid = _require(rn, "id", f"nodes[{k}].id", int)
        if nid in seen_ids:
            raise SchemaError(f"nodes[{k}].id", f"duplicate node id {nid}")
        if not 0 <= nid < len(raw_nodes):
            raise SchemaError(f"nodes[{k}].id", f"node ids must be 0..{len(raw_nodes) - 1}")
        seen_ids.add(nid)
        label = rn.get("label")
        if label is not None and not isinstance(label, str):
            raise SchemaError(f"nodes[{k}].label", "expected a string")
        anchors = []
        for j, a in enumerate(rn.get("anchors") or ()):
            if not isinstance(a, dict):
                raise SchemaError(f"nodes[{k}].anchors[{j}]", "expected an object")
            lo = _require(a, "from", f"nodes[{k}].anchors[{j}].from", int)
            hi = _require(a, "to", f"nodes[{k}].anchors[{j}].to", int)
            anchors.append((lo, hi))
        nodes.append(Node(nid, label, None, tuple(anchors)))

    edges = []
    seen_edges = set()
    for k, re_ in enumerate(raw_edges):
        if not isinstance(re_, dict):
            raise SchemaError(f"edges[{k}]", "expected an object")
        src = _require(re_, "source", f"edges[{k}].source", int)
        tgt = _require(re_, "target", f"edges[{k}].target", int)
        if src not in seen_ids:
            raise SchemaError(f"edges[{k}].source", f"unknown node {src}")
        if tgt not in seen_ids:
            raise SchemaError(f"edges[{k}].target", f"unknown node {tgt}")
        if src == tgt:
            raise SchemaError(f"edges[{k}].target", "self-loop")
        label = re_.get("label")
        if label is not None and not isinstance(label, str):
            raise SchemaError(f"edges[{k}].label", "expected a string")
        e = Edge(src, tgt, label)
        if e in seen_edges:
            raise SchemaError(f"edges[{k}]", "parallel edge")
        seen_edges.add(e)
        edges.append(e)

    for k, t in enumerate(raw_tops):
        if not isinstance(t, int) or isinstance(t, bool) or t not in seen_ids:
            raise SchemaError(f"tops[{k}]", "not a node id")
    return Drg(doc_id, encoding, tuple(nodes), tuple(edges), tuple(raw_tops), error)


def read_jsonl(path):
    graphs = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                graphs.append(from_interchange(line))
            except SchemaError as exc:
                raise SchemaError(f"line {line_no}: {exc.path}", exc.reason) from None
    return graphs


def write_jsonl(graphs, stream):
    for g in graphs:
        stream.write(to_interchange(g))
        stream.write("\n")


def stats(g):
    labeled_nodes = sum(1 for n in g.nodes if n.label is not None)
    return {
        "node_count": len(g.nodes),
        "edge_count": len(g.edges),
        "labeled_node_count": labeled_nodes,
        "unlabeled_node_count": len(g.nodes) - labeled_nodes,
        "labeled_edge_count": sum(1 for e in g.edges if e.label is not None),
    }


def _dot_escape(text):
    return text.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(g):
    """Graphviz rendering for debugging; unlabeled nodes are filled gray."""
    shapes = {
        NodeKind.BOX: "box",
        NodeKind.CONSTANT: "plaintext",
        NodeKind.PREDICATE: "ellipse",
        NodeKind.REIFIED: "diamond",
    }
    lines = [f'digraph "{_dot_escape(g.doc_id)}" {{']
    for n in g.nodes:
        attrs = [f'shape={shapes.get(n.kind, "circle")}']
        if n.label is None:
            attrs.append('label=""')
            attrs.append("style=filled")
            attrs.append("fillcolor=gray")
        else:
            attrs.append(f'label="{_dot_escape(n.label)}"')
        if n.id in g.tops:
            attrs.append("penwidth=2")
        lines.append(f"  n{n.id} [{', '.join(attrs)}];")
    for e in g.edges:
        lab = f' [label="{_dot_escape(e.label)}"]' if e.label is not None else ""
        lines.append(f"  n{e.source} -> n{e.target}{lab};")
    lines.append("}")
    return "\n".join(lines) + "\n"
