"""Query patterns and the four primitive operators: Initiate, Select, Add, Shift.

Patterns are immutable values; operators return new patterns, which makes
history snapshots trivial. A pattern is always a tree of type occurrences
rooted anywhere, with one occurrence marked primary.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from .errors import (
    HistoryError,
    PatternError,
    PredicateError,
    UnknownOccurrenceError,
)
from .model import SchemaGraph, Violation

COMPARATORS = ("=", "!=", "<", "<=", ">", ">=", "contains")

TARGET_ATTRIBUTE = "attribute"
TARGET_NEIGHBOR_LABEL = "neighbor_label"
TARGET_NODE = "node"


@dataclass(frozen=True)
class PredicateTarget:
    kind: str
    name: Optional[str] = None  # attribute name for TARGET_ATTRIBUTE
    edge_type: Optional[str] = None  # edge type id for TARGET_NEIGHBOR_LABEL

    @classmethod
    def attribute(cls, name: str) -> "PredicateTarget":
        return cls(TARGET_ATTRIBUTE, name=name)

    @classmethod
    def neighbor_label(cls, edge_type: str) -> "PredicateTarget":
        return cls(TARGET_NEIGHBOR_LABEL, edge_type=edge_type)

    @classmethod
    def node(cls) -> "PredicateTarget":
        return cls(TARGET_NODE)


@dataclass(frozen=True)
class Predicate:
    target: PredicateTarget
    op: str
    value: object

    def to_json_dict(self) -> dict:
        t: dict = {"kind": self.target.kind}
        if self.target.name is not None:
            t["name"] = self.target.name
        if self.target.edge_type is not None:
            t["edge_type"] = self.target.edge_type
        return {"target": t, "op": self.op, "value": self.value}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "Predicate":
        t = doc["target"]
        target = PredicateTarget(
            kind=t["kind"], name=t.get("name"), edge_type=t.get("edge_type")
        )
        return cls(target=target, op=doc["op"], value=doc["value"])


@dataclass(frozen=True)
class Condition:
    """Conjunction of predicates; the empty condition selects everything."""

    predicates: tuple[Predicate, ...] = ()

    @property
    def is_empty(self) -> bool:
        return not self.predicates

    def conjoin(self, other: "Condition") -> "Condition":
        return Condition(self.predicates + other.predicates)

    def to_json_list(self) -> list:
        return [p.to_json_dict() for p in self.predicates]

    @classmethod
    def from_json_list(cls, docs: Iterable[dict]) -> "Condition":
        return cls(tuple(Predicate.from_json_dict(d) for d in docs))


TOP = Condition()


@dataclass(frozen=True)
class PatternOccurrence:
    id: str
    node_type: str
    condition: Condition = TOP
    alias: str = ""


@dataclass(frozen=True)
class PatternEdge:
    edge_type: str
    from_occurrence: str
    to_occurrence: str


@dataclass(frozen=True)
class QueryPattern:
    occurrences: tuple[PatternOccurrence, ...]
    edges: tuple[PatternEdge, ...]
    primary: str

    def occurrence(self, occ_id: str) -> PatternOccurrence:
        for occ in self.occurrences:
            if occ.id == occ_id:
                return occ
        raise UnknownOccurrenceError(f"unknown occurrence {occ_id!r}")

    @property
    def primary_occurrence(self) -> PatternOccurrence:
        return self.occurrence(self.primary)

    def occurrence_ids(self) -> tuple[str, ...]:
        return tuple(o.id for o in self.occurrences)

    def to_json_dict(self) -> dict:
        return {
            "primary": self.primary,
            "occurrences": [
                {
                    "id": o.id,
                    "node_type": o.node_type,
                    "alias": o.alias,
                    "predicates": o.condition.to_json_list(),
                }
                for o in self.occurrences
            ],
            "edges": [
                {
                    "edge_type": e.edge_type,
                    "from": e.from_occurrence,
                    "to": e.to_occurrence,
                }
                for e in self.edges
            ],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "QueryPattern":
        return cls(
            occurrences=tuple(
                PatternOccurrence(
                    id=o["id"],
                    node_type=o["node_type"],
                    alias=o.get("alias", o["node_type"]),
                    condition=Condition.from_json_list(o.get("predicates", [])),
                )
                for o in doc["occurrences"]
            ),
            edges=tuple(
                PatternEdge(e["edge_type"], e["from"], e["to"]) for e in doc["edges"]
            ),
            primary=doc["primary"],
        )


def _next_occurrence_id(pattern: Optional[QueryPattern]) -> str:
    if pattern is None:
        return "o1"
    n = 1
    taken = set(pattern.occurrence_ids())
    while f"o{n}" in taken:
        n += 1
    return f"o{n}"


def _alias_for(pattern: Optional[QueryPattern], type_name: str) -> str:
    existing = set()
    if pattern is not None:
        existing = {o.alias for o in pattern.occurrences}
    alias = type_name
    n = 1
    while alias in existing:
        n += 1
        alias = f"{type_name} ({n})"
    return alias


# -- primitive operators -------------------------------------------------


def initiate(schema: SchemaGraph, node_type_id: str) -> QueryPattern:
    """Fresh single-occurrence pattern over one node type."""
    nt = schema.node_type(node_type_id)
    occ = PatternOccurrence(id="o1", node_type=nt.id, alias=nt.name)
    return QueryPattern(occurrences=(occ,), edges=(), primary="o1")


def _check_predicates(schema: SchemaGraph, node_type_id: str, condition: Condition) -> None:
    nt = schema.node_type(node_type_id)
    attr_kinds = {a.name: a.kind for a in nt.attributes}
    for pred in condition.predicates:
        if pred.op not in COMPARATORS:
            raise PredicateError(f"unknown comparator {pred.op!r}")
        if pred.target.kind == TARGET_ATTRIBUTE:
            kind = attr_kinds.get(pred.target.name)
            if kind is None:
                raise PredicateError(
                    f"node type {nt.name!r} has no attribute {pred.target.name!r}"
                )
            if pred.op == "contains" and kind != "text":
                raise PredicateError("contains applies only to text attributes")
        elif pred.target.kind == TARGET_NEIGHBOR_LABEL:
            et = schema.edge_type(pred.target.edge_type)
            if et.source_type != node_type_id:
                raise PredicateError(
                    f"edge type {et.id!r} does not start at node type {nt.name!r}"
                )
            if pred.op not in ("=", "contains"):
                raise PredicateError("neighbor-label predicates support only = and contains")
            if not isinstance(pred.value, str):
                raise PredicateError("neighbor-label predicates take a text operand")
        elif pred.target.kind == TARGET_NODE:
            if pred.op != "=":
                raise PredicateError("node-identity predicates support only =")
        else:
            raise PredicateError(f"unknown predicate target kind {pred.target.kind!r}")


def apply_select(
    pattern: QueryPattern,
    condition: Condition,
    schema: SchemaGraph,
    mode: str = "conjoin",
) -> QueryPattern:
    """Attach a condition to the primary occurrence.

    ``conjoin`` (the default) refines the existing condition; ``replace``
    swaps it out wholesale.
    """
    primary = pattern.primary_occurrence
    _check_predicates(schema, primary.node_type, condition)
    if mode == "conjoin":
        if condition.is_empty:
            return pattern
        new_condition = primary.condition.conjoin(condition)
    elif mode == "replace":
        new_condition = condition
    else:
        raise PredicateError(f"unknown select mode {mode!r}")
    occurrences = tuple(
        replace(o, condition=new_condition) if o.id == pattern.primary else o
        for o in pattern.occurrences
    )
    return replace(pattern, occurrences=occurrences)


def apply_add(pattern: QueryPattern, edge_type_id: str, schema: SchemaGraph) -> QueryPattern:
    """Join a new occurrence along an edge from the primary; primary moves there."""
    et = schema.edge_type(edge_type_id)
    primary = pattern.primary_occurrence
    if et.source_type != primary.node_type:
        from .errors import TypeMismatchError

        raise TypeMismatchError(
            f"edge type {edge_type_id!r} starts at {et.source_type!r}, "
            f"primary occurrence has type {primary.node_type!r}"
        )
    target_nt = schema.node_type(et.target_type)
    new_id = _next_occurrence_id(pattern)
    new_occ = PatternOccurrence(
        id=new_id, node_type=et.target_type, alias=_alias_for(pattern, target_nt.name)
    )
    new_edge = PatternEdge(
        edge_type=edge_type_id, from_occurrence=pattern.primary, to_occurrence=new_id
    )
    return QueryPattern(
        occurrences=pattern.occurrences + (new_occ,),
        edges=pattern.edges + (new_edge,),
        primary=new_id,
    )


def apply_shift(pattern: QueryPattern, occurrence_id: str) -> QueryPattern:
    """Move the primary marker; everything else stays identical."""
    pattern.occurrence(occurrence_id)
    return replace(pattern, primary=occurrence_id)


# -- validation ----------------------------------------------------------


def validate_pattern(pattern: QueryPattern, schema: SchemaGraph) -> list[Violation]:
    report: list[Violation] = []
    ids = [o.id for o in pattern.occurrences]
    if len(set(ids)) != len(ids):
        report.append(Violation("occurrence_ids_unique", "pattern", "duplicate occurrence ids"))
    aliases = [o.alias for o in pattern.occurrences]
    if len(set(aliases)) != len(aliases):
        report.append(Violation("aliases_unique", "pattern", "duplicate occurrence aliases"))
    if pattern.primary not in ids:
        report.append(Violation("primary_exists", pattern.primary, "primary occurrence missing"))
    for occ in pattern.occurrences:
        if occ.node_type not in schema.node_types:
            report.append(
                Violation("occurrence_type", occ.id, f"unknown node type {occ.node_type!r}")
            )
            continue
        try:
            _check_predicates(schema, occ.node_type, occ.condition)
        except PredicateError as exc:
            report.append(Violation("predicate_typing", occ.id, exc.message))
    id_set = set(ids)
    for edge in pattern.edges:
        if edge.from_occurrence not in id_set or edge.to_occurrence not in id_set:
            report.append(
                Violation("edge_endpoints", edge.edge_type, "edge endpoint occurrence missing")
            )
            continue
        et = schema.edge_types.get(edge.edge_type)
        if et is None:
            report.append(
                Violation("edge_type_exists", edge.edge_type, "unknown edge type")
            )
            continue
        if pattern.occurrence(edge.from_occurrence).node_type != et.source_type:
            report.append(
                Violation("edge_source_typing", edge.edge_type, "source occurrence type mismatch")
            )
        if pattern.occurrence(edge.to_occurrence).node_type != et.target_type:
            report.append(
                Violation("edge_target_typing", edge.edge_type, "target occurrence type mismatch")
            )
    # Tree shape: connected and acyclic means exactly n-1 edges plus reachability.
    if len(pattern.edges) != len(pattern.occurrences) - 1:
        report.append(
            Violation("tree_edge_count", "pattern", "|edges| != |occurrences| - 1")
        )
    if ids:
        adjacency: dict[str, set[str]] = {i: set() for i in ids}
        for edge in pattern.edges:
            if edge.from_occurrence in adjacency and edge.to_occurrence in adjacency:
                adjacency[edge.from_occurrence].add(edge.to_occurrence)
                adjacency[edge.to_occurrence].add(edge.from_occurrence)
        seen = {ids[0]}
        stack = [ids[0]]
        while stack:
            cur = stack.pop()
            for nxt in adjacency[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        if len(seen) != len(ids):
            report.append(Violation("connected", "pattern", "pattern is not connected"))
    return report


def require_valid(pattern: QueryPattern, schema: SchemaGraph) -> None:
    report = validate_pattern(pattern, schema)
    if report:
        raise PatternError(
            "invalid query pattern", detail=[f"{v.rule}: {v.message}" for v in report]
        )


# -- operator history ----------------------------------------------------


@dataclass(frozen=True)
class OperatorRecord:
    kind: str  # Initiate | Select | Add | Shift
    args: dict
    pattern: QueryPattern
    timestamp: float = field(default_factory=time.time)

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "args": self.args}


def apply_operator(
    schema: SchemaGraph, pattern: Optional[QueryPattern], kind: str, args: dict
) -> QueryPattern:
    if kind == "Initiate":
        return initiate(schema, args["node_type"])
    if pattern is None:
        raise HistoryError("history must start with Initiate")
    if kind == "Select":
        return apply_select(
            pattern,
            Condition.from_json_list(args["predicates"]),
            schema,
            mode=args.get("mode", "conjoin"),
        )
    if kind == "Add":
        return apply_add(pattern, args["edge_type"], schema)
    if kind == "Shift":
        return apply_shift(pattern, args["occurrence"])
    raise HistoryError(f"unknown operator kind {kind!r}")


def record(schema: SchemaGraph, pattern: Optional[QueryPattern], kind: str, args: dict) -> OperatorRecord:
    return OperatorRecord(kind=kind, args=args, pattern=apply_operator(schema, pattern, kind, args))


def replay(schema: SchemaGraph, records: Sequence[OperatorRecord]) -> QueryPattern:
    """Fold operator records into the pattern they describe."""
    if not records:
        raise HistoryError("empty history")
    if records[0].kind != "Initiate":
        raise HistoryError("history must start with Initiate")
    pattern: Optional[QueryPattern] = None
    for rec in records:
        pattern = apply_operator(schema, pattern, rec.kind, rec.args)
    return pattern


def describe_record(rec: OperatorRecord) -> str:
    if rec.kind == "Initiate":
        return f"Initiate({rec.args['node_type']})"
    if rec.kind == "Select":
        parts = []
        for p in rec.args["predicates"]:
            t = p["target"]
            if t["kind"] == TARGET_ATTRIBUTE:
                subject = t["name"]
            elif t["kind"] == TARGET_NEIGHBOR_LABEL:
                subject = f"label({t['edge_type']})"
            else:
                subject = "node"
            parts.append(f"{subject} {p['op']} {p['value']!r}")
        return f"Select({' AND '.join(parts) or 'TRUE'})"
    if rec.kind == "Add":
        return f"Add({rec.args['edge_type']})"
    if rec.kind == "Shift":
        return f"Shift({rec.args['occurrence']})"
    return rec.kind
