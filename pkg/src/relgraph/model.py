"""Typed graph model: schema graph, instance graph, indexed lookups.

The instance graph is immutable after construction and safe to share across
concurrent readers. All iteration orders are ascending by id so that query
results are deterministic.
"""

from __future__ import annotations

import datetime
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .errors import (
    SchemaError,
    TypeMismatchError,
    UnknownEdgeTypeError,
    UnknownNodeError,
    UnknownTypeError,
)

VALUE_KINDS = ("text", "integer", "real", "boolean", "date")

NODE_ORIGINS = ("entity_table", "multivalued_attribute", "categorical_attribute")

EDGE_ORIGINS = (
    "fk_one_to_many",
    "mn_relationship",
    "multivalued_attribute",
    "categorical_attribute",
)


@dataclass(frozen=True)
class AttributeDef:
    name: str
    kind: str

    def __post_init__(self):
        if self.kind not in VALUE_KINDS:
            raise SchemaError(f"unknown value kind {self.kind!r} for attribute {self.name!r}")


@dataclass(frozen=True)
class NodeType:
    id: str
    name: str
    attributes: tuple[AttributeDef, ...]
    label_attribute: str
    origin: str

    def __post_init__(self):
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate attribute names in node type {self.name!r}")
        if self.label_attribute not in names:
            raise SchemaError(
                f"label attribute {self.label_attribute!r} not an attribute of {self.name!r}"
            )
        if self.origin not in NODE_ORIGINS:
            raise SchemaError(f"unknown node type origin {self.origin!r}")

    def attribute_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    def attribute(self, name: str) -> AttributeDef:
        for a in self.attributes:
            if a.name == name:
                return a
        raise SchemaError(f"node type {self.name!r} has no attribute {name!r}")


@dataclass(frozen=True)
class EdgeType:
    id: str
    name: str
    source_type: str
    target_type: str
    origin: str
    reverse_of: Optional[str] = None

    def __post_init__(self):
        if self.origin not in EDGE_ORIGINS:
            raise SchemaError(f"unknown edge type origin {self.origin!r}")

    @property
    def is_self_loop(self) -> bool:
        return self.source_type == self.target_type


class SchemaGraph:
    """Node types and edge types describing the conceptual mini-world."""

    def __init__(self, node_types: Iterable[NodeType], edge_types: Iterable[EdgeType]):
        self.node_types: dict[str, NodeType] = {}
        self.edge_types: dict[str, EdgeType] = {}
        for nt in node_types:
            if nt.id in self.node_types:
                raise SchemaError(f"duplicate node type id {nt.id!r}")
            self.node_types[nt.id] = nt
        names = [nt.name for nt in self.node_types.values()]
        if len(set(names)) != len(names):
            raise SchemaError("node type names must be unique")
        for et in edge_types:
            if et.id in self.edge_types:
                raise SchemaError(f"duplicate edge type id {et.id!r}")
            if et.source_type not in self.node_types:
                raise SchemaError(f"edge type {et.id!r}: unknown source type {et.source_type!r}")
            if et.target_type not in self.node_types:
                raise SchemaError(f"edge type {et.id!r}: unknown target type {et.target_type!r}")
            self.edge_types[et.id] = et
        # Edge names double as column headers; they must be unique per source type.
        per_source = set()
        for et in self.edge_types.values():
            key = (et.source_type, et.name)
            if key in per_source:
                raise SchemaError(
                    f"duplicate edge name {et.name!r} from node type {et.source_type!r}"
                )
            per_source.add(key)
        for et in self.edge_types.values():
            if et.reverse_of is not None:
                rev = self.edge_types.get(et.reverse_of)
                if rev is None:
                    raise SchemaError(f"edge type {et.id!r}: unknown reverse {et.reverse_of!r}")
                if rev.reverse_of != et.id:
                    raise SchemaError(f"reverse pairing of {et.id!r} is not an involution")
                if rev.source_type != et.target_type or rev.target_type != et.source_type:
                    raise SchemaError(f"reverse of {et.id!r} does not swap source/target")
            elif not et.is_self_loop:
                raise SchemaError(f"non-self-loop edge type {et.id!r} has no reverse")

    def node_type(self, type_id: str) -> NodeType:
        try:
            return self.node_types[type_id]
        except KeyError:
            raise UnknownTypeError(f"unknown node type {type_id!r}") from None

    def edge_type(self, type_id: str) -> EdgeType:
        try:
            return self.edge_types[type_id]
        except KeyError:
            raise UnknownEdgeTypeError(f"unknown edge type {type_id!r}") from None

    def node_type_by_name(self, name: str) -> NodeType:
        for nt in self.node_types.values():
            if nt.name == name:
                return nt
        raise UnknownTypeError(f"unknown node type named {name!r}")

    def edge_types_from(self, type_id: str) -> list[EdgeType]:
        """Edge types whose source is ``type_id``, in declaration order."""
        return [et for et in self.edge_types.values() if et.source_type == type_id]

    def edge_type_from_name(self, source_type: str, name: str) -> EdgeType:
        for et in self.edge_types_from(source_type):
            if et.name == name:
                return et
        raise UnknownEdgeTypeError(f"no edge named {name!r} from node type {source_type!r}")


@dataclass(frozen=True)
class Node:
    id: str
    node_type: str
    values: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class Edge:
    id: str
    edge_type: str
    source: str
    target: str
    values: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class Violation:
    rule: str
    subject: str
    message: str


class InstanceGraph:
    """Typed nodes and edges plus the adjacency indexes execution relies on."""

    def __init__(self, schema: SchemaGraph, nodes: Iterable[Node], edges: Iterable[Edge]):
        self.schema = schema
        self.nodes: dict[str, Node] = {}
        self.edges: dict[str, Edge] = {}
        for n in nodes:
            if n.id in self.nodes:
                raise SchemaError(f"duplicate node id {n.id!r}")
            self.nodes[n.id] = n
        for e in edges:
            if e.id in self.edges:
                raise SchemaError(f"duplicate edge id {e.id!r}")
            self.edges[e.id] = e
        self._by_type: dict[str, list[str]] = {t: [] for t in schema.node_types}
        for nid in sorted(self.nodes):
            node = self.nodes[nid]
            if node.node_type in self._by_type:
                self._by_type[node.node_type].append(nid)
        self._out: dict[tuple[str, str], list[str]] = {}
        self._in: dict[tuple[str, str], list[str]] = {}
        for eid in sorted(self.edges):
            e = self.edges[eid]
            self._out.setdefault((e.source, e.edge_type), []).append(e.target)
            self._in.setdefault((e.target, e.edge_type), []).append(e.source)
        for targets in self._out.values():
            targets.sort()
        for sources in self._in.values():
            sources.sort()

    # -- lookups ---------------------------------------------------------

    def node(self, node_id: str) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNodeError(f"unknown node {node_id!r}") from None

    def nodes_of_type(self, type_id: str) -> list[Node]:
        """All nodes of a type, ascending by node id."""
        self.schema.node_type(type_id)
        return [self.nodes[nid] for nid in self._by_type.get(type_id, [])]

    def neighbors(self, node_id: str, edge_type_id: str) -> list[Node]:
        """Targets of the node's outgoing edges of the given type, ascending by id."""
        node = self.node(node_id)
        et = self.schema.edge_type(edge_type_id)
        if et.source_type != node.node_type:
            raise TypeMismatchError(
                f"edge type {edge_type_id!r} starts at {et.source_type!r}, "
                f"node {node_id!r} has type {node.node_type!r}"
            )
        seen = []
        prev = None
        for tid in self._out.get((node_id, edge_type_id), []):
            if tid != prev:
                seen.append(self.nodes[tid])
            prev = tid
        return seen

    def neighbor_ids(self, node_id: str, edge_type_id: str) -> list[str]:
        return sorted(set(self._out.get((node_id, edge_type_id), [])))

    def incoming_ids(self, node_id: str, edge_type_id: str) -> list[str]:
        return sorted(set(self._in.get((node_id, edge_type_id), [])))

    def label(self, node_id: str) -> str:
        """Display text for a node: its label attribute, or the id when null."""
        node = self.node(node_id)
        nt = self.schema.node_type(node.node_type)
        value = node.values.get(nt.label_attribute)
        if value is None:
            return node.id
        return render_value(value)

    # -- validation ------------------------------------------------------

    def validate(self) -> list[Violation]:
        """Check every type invariant; violations are data, not exceptions."""
        report: list[Violation] = []
        for nid, node in self.nodes.items():
            if node.node_type not in self.schema.node_types:
                report.append(Violation("node_type_exists", nid, f"unknown type {node.node_type!r}"))
                continue
            nt = self.schema.node_types[node.node_type]
            extra = set(node.values) - set(nt.attribute_names())
            if extra:
                report.append(
                    Violation("node_values_subset", nid, f"values not in type: {sorted(extra)}")
                )
        mirrored = {(e.edge_type, e.source, e.target) for e in self.edges.values()}
        for eid, edge in self.edges.items():
            et = self.schema.edge_types.get(edge.edge_type)
            if et is None:
                report.append(Violation("edge_type_exists", eid, f"unknown type {edge.edge_type!r}"))
                continue
            src = self.nodes.get(edge.source)
            tgt = self.nodes.get(edge.target)
            if src is None or tgt is None:
                report.append(Violation("edge_endpoints_exist", eid, "dangling endpoint"))
                continue
            if src.node_type != et.source_type:
                report.append(
                    Violation("edge_source_type", eid, f"source {edge.source!r} has wrong type")
                )
            if tgt.node_type != et.target_type:
                report.append(
                    Violation("edge_target_type", eid, f"target {edge.target!r} has wrong type")
                )
            if et.reverse_of is not None and not et.is_self_loop:
                if (et.reverse_of, edge.target, edge.source) not in mirrored:
                    report.append(
                        Violation(
                            "edge_bidirectional",
                            eid,
                            f"missing mirrored edge of type {et.reverse_of!r}",
                        )
                    )
        return report

    # -- serialization ---------------------------------------------------

    def to_json_dict(self) -> dict:
        """One document with four arrays: node_types, edge_types, nodes, edges."""
        return {
            "node_types": [
                {
                    "id": nt.id,
                    "name": nt.name,
                    "attributes": [{"name": a.name, "kind": a.kind} for a in nt.attributes],
                    "label_attribute": nt.label_attribute,
                    "origin": nt.origin,
                }
                for nt in self.schema.node_types.values()
            ],
            "edge_types": [
                {
                    "id": et.id,
                    "name": et.name,
                    "source_type": et.source_type,
                    "target_type": et.target_type,
                    "reverse_of": et.reverse_of,
                    "origin": et.origin,
                }
                for et in self.schema.edge_types.values()
            ],
            "nodes": [
                {
                    "id": n.id,
                    "type": n.node_type,
                    "values": {k: encode_value(v) for k, v in n.values.items()},
                }
                for n in self.nodes.values()
            ],
            "edges": [
                {
                    "id": e.id,
                    "type": e.edge_type,
                    "source": e.source,
                    "target": e.target,
                    "values": {k: encode_value(v) for k, v in e.values.items()},
                }
                for e in self.edges.values()
            ],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "InstanceGraph":
        node_types = [
            NodeType(
                id=d["id"],
                name=d["name"],
                attributes=tuple(AttributeDef(a["name"], a["kind"]) for a in d["attributes"]),
                label_attribute=d["label_attribute"],
                origin=d["origin"],
            )
            for d in doc["node_types"]
        ]
        edge_types = [
            EdgeType(
                id=d["id"],
                name=d["name"],
                source_type=d["source_type"],
                target_type=d["target_type"],
                reverse_of=d.get("reverse_of"),
                origin=d["origin"],
            )
            for d in doc["edge_types"]
        ]
        schema = SchemaGraph(node_types, edge_types)
        kinds = {
            nt.id: {a.name: a.kind for a in nt.attributes} for nt in schema.node_types.values()
        }
        nodes = [
            Node(
                id=d["id"],
                node_type=d["type"],
                values={
                    k: decode_value(v, kinds.get(d["type"], {}).get(k, "text"))
                    for k, v in d.get("values", {}).items()
                },
            )
            for d in doc["nodes"]
        ]
        edges = [
            Edge(
                id=d["id"],
                edge_type=d["type"],
                source=d["source"],
                target=d["target"],
                values=dict(d.get("values", {})),
            )
            for d in doc["edges"]
        ]
        return cls(schema, nodes, edges)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, ensure_ascii=False, indent=2)

    @classmethod
    def load(cls, path) -> "InstanceGraph":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))

    def equals(self, other: "InstanceGraph") -> bool:
        return self.to_json_dict() == other.to_json_dict()


def encode_value(value):
    if isinstance(value, datetime.date):
        return value.isoformat()
    return value


def decode_value(value, kind: str):
    if value is None:
        return None
    if kind == "date" and isinstance(value, str):
        return datetime.date.fromisoformat(value)
    return value


def render_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, datetime.date):
        return value.isoformat()
    return str(value)
