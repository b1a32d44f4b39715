"""Graph relations and the selection / join / projection operators.

A graph relation is a set of fixed-arity node-id tuples, one attribute per
pattern occurrence. ``match`` evaluates a query pattern over the instance
graph by filtering the base relation of a starting occurrence and expanding
along the pattern tree through the adjacency indexes; the result is
independent of the expansion order.
"""

from __future__ import annotations

import datetime
from dataclasses import dataclass

from .errors import (
    PatternError,
    RelationAttributeError,
    TypeMismatchError,
)
from .model import InstanceGraph, Node
from .pattern import (
    TARGET_ATTRIBUTE,
    TARGET_NEIGHBOR_LABEL,
    TARGET_NODE,
    Condition,
    PatternOccurrence,
    Predicate,
    QueryPattern,
    require_valid,
)


@dataclass(frozen=True)
class GraphRelation:
    attributes: tuple[str, ...]  # occurrence ids, in pattern order
    tuples: frozenset[tuple[str, ...]]  # node ids, aligned with attributes

    def __post_init__(self):
        if len(set(self.attributes)) != len(self.attributes):
            raise RelationAttributeError("duplicate relation attributes")

    def index_of(self, occurrence_id: str) -> int:
        try:
            return self.attributes.index(occurrence_id)
        except ValueError:
            raise RelationAttributeError(
                f"occurrence {occurrence_id!r} not in relation attributes"
            ) from None

    @property
    def arity(self) -> int:
        return len(self.attributes)

    def sorted_tuples(self) -> list[tuple[str, ...]]:
        return sorted(self.tuples)

    def to_csv(self) -> str:
        lines = [",".join(self.attributes)]
        lines.extend(",".join(t) for t in self.sorted_tuples())
        return "\n".join(lines) + "\n"


def _compare(left, op: str, right) -> bool:
    if left is None:
        return False
    if op == "contains":
        return isinstance(left, str) and isinstance(right, str) and right in left
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    if isinstance(left, datetime.date) and isinstance(right, str):
        right = datetime.date.fromisoformat(right)
    try:
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        if op == ">=":
            return left >= right
    except TypeError:
        return False
    return False


def satisfies_predicate(graph: InstanceGraph, node: Node, pred: Predicate) -> bool:
    if pred.target.kind == TARGET_ATTRIBUTE:
        return _compare(node.values.get(pred.target.name), pred.op, pred.value)
    if pred.target.kind == TARGET_NEIGHBOR_LABEL:
        # EXISTS semantics: some neighbor along the edge type has a matching label.
        for nid in graph.neighbor_ids(node.id, pred.target.edge_type):
            if _compare(graph.label(nid), pred.op, pred.value):
                return True
        return False
    if pred.target.kind == TARGET_NODE:
        return node.id == pred.value
    return False


def satisfies(graph: InstanceGraph, node: Node, condition: Condition) -> bool:
    return all(satisfies_predicate(graph, node, p) for p in condition.predicates)


# -- operators -----------------------------------------------------------


def base_relation(graph: InstanceGraph, occurrence: PatternOccurrence) -> GraphRelation:
    nodes = graph.nodes_of_type(occurrence.node_type)
    return GraphRelation(
        attributes=(occurrence.id,), tuples=frozenset((n.id,) for n in nodes)
    )


def select_sigma(
    relation: GraphRelation,
    occurrence_id: str,
    condition: Condition,
    graph: InstanceGraph,
) -> GraphRelation:
    if condition.is_empty:
        return relation
    idx = relation.index_of(occurrence_id)
    kept = frozenset(
        t for t in relation.tuples if satisfies(graph, graph.node(t[idx]), condition)
    )
    return GraphRelation(attributes=relation.attributes, tuples=kept)


def join_star(
    rel1: GraphRelation,
    rel2: GraphRelation,
    edge_type_id: str,
    occ1: str,
    occ2: str,
    graph: InstanceGraph,
) -> GraphRelation:
    """Edge-join: keep concatenated tuples linked by an instance edge."""
    if set(rel1.attributes) & set(rel2.attributes):
        raise RelationAttributeError("joined relations must have disjoint attributes")
    i1 = rel1.index_of(occ1)
    i2 = rel2.index_of(occ2)
    et = graph.schema.edge_type(edge_type_id)
    by_target: dict[str, list[tuple[str, ...]]] = {}
    for t2 in rel2.tuples:
        by_target.setdefault(t2[i2], []).append(t2)
    out = set()
    for t1 in rel1.tuples:
        source = t1[i1]
        if graph.node(source).node_type != et.source_type:
            raise TypeMismatchError(
                f"edge type {edge_type_id!r} does not start at the type of {source!r}"
            )
        for nb in graph.neighbor_ids(source, edge_type_id):
            for t2 in by_target.get(nb, ()):
                out.add(t1 + t2)
    return GraphRelation(attributes=rel1.attributes + rel2.attributes, tuples=frozenset(out))


def project_pi(relation: GraphRelation, occurrence_id: str) -> GraphRelation:
    idx = relation.index_of(occurrence_id)
    return GraphRelation(
        attributes=(occurrence_id,), tuples=frozenset((t[idx],) for t in relation.tuples)
    )


# -- instance matching ---------------------------------------------------


def _default_order(pattern: QueryPattern) -> list[str]:
    """Primary-first breadth-first walk of the pattern tree."""
    adjacency: dict[str, list[str]] = {o.id: [] for o in pattern.occurrences}
    for e in pattern.edges:
        adjacency[e.from_occurrence].append(e.to_occurrence)
        adjacency[e.to_occurrence].append(e.from_occurrence)
    order = [pattern.primary]
    seen = {pattern.primary}
    queue = [pattern.primary]
    while queue:
        cur = queue.pop(0)
        for nxt in sorted(adjacency[cur]):
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
                queue.append(nxt)
    return order


def _expand_ids(graph: InstanceGraph, node_id: str, edge, forward: bool) -> list[str]:
    et = graph.schema.edge_type(edge.edge_type)
    if forward:
        return graph.neighbor_ids(node_id, edge.edge_type)
    if et.reverse_of is not None:
        return graph.neighbor_ids(node_id, et.reverse_of)
    return graph.incoming_ids(node_id, edge.edge_type)


def match(
    pattern: QueryPattern, graph: InstanceGraph, order: list[str] | None = None
) -> GraphRelation:
    """All tuples of node instances the pattern matches, one column per occurrence.

    ``order`` optionally fixes the evaluation order (must respect connectivity);
    the tuple set is the same for every valid order.
    """
    require_valid(pattern, graph.schema)
    if order is None:
        order = _default_order(pattern)
    ids = set(pattern.occurrence_ids())
    if set(order) != ids or len(order) != len(ids):
        raise PatternError("evaluation order must list each occurrence exactly once")

    candidates = {
        o.id: {
            n.id
            for n in graph.nodes_of_type(o.node_type)
            if satisfies(graph, n, o.condition)
        }
        for o in pattern.occurrences
    }

    first = pattern.occurrence(order[0])
    attributes = [first.id]
    tuples: set[tuple[str, ...]] = {(nid,) for nid in candidates[first.id]}

    for occ_id in order[1:]:
        connecting = None
        for e in pattern.edges:
            if e.to_occurrence == occ_id and e.from_occurrence in attributes:
                connecting = (e, True)
                break
            if e.from_occurrence == occ_id and e.to_occurrence in attributes:
                connecting = (e, False)
                break
        if connecting is None:
            raise PatternError(f"occurrence {occ_id!r} is not connected to the prefix")
        edge, forward = connecting
        anchor = edge.from_occurrence if forward else edge.to_occurrence
        anchor_idx = attributes.index(anchor)
        cand = candidates[occ_id]
        out: set[tuple[str, ...]] = set()
        for t in tuples:
            for nb in _expand_ids(graph, t[anchor_idx], edge, forward):
                if nb in cand:
                    out.add(t + (nb,))
        attributes.append(occ_id)
        tuples = out

    # Column order follows occurrence insertion order, not evaluation order.
    final_order = [o.id for o in pattern.occurrences]
    perm = [attributes.index(occ_id) for occ_id in final_order]
    reordered = frozenset(tuple(t[i] for i in perm) for t in tuples)
    return GraphRelation(attributes=tuple(final_order), tuples=reordered)
