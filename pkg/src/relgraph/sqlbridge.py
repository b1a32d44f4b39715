"""Two-way bridge between query patterns and join-query descriptions.

``emit_sql`` renders the general SQL shape of a pattern (SELECT primary.*,
ent-list(...) / FROM / WHERE / GROUP BY). ``pattern_from_join_query`` maps a
structured FK-PK join query over the original relations onto an equivalent
pattern: entity aliases become occurrences, relationship-table aliases
collapse into pattern edges, multivalued-table aliases become occurrences of
the derived value node type.
"""

from __future__ import annotations

import datetime
import json
from dataclasses import dataclass, field
from typing import Optional

from .errors import NoEdgeTypeError, PatternError, UnknownRelationError
from .model import SchemaGraph
from .pattern import (
    TARGET_ATTRIBUTE,
    TARGET_NEIGHBOR_LABEL,
    TARGET_NODE,
    Condition,
    PatternEdge,
    PatternOccurrence,
    Predicate,
    PredicateTarget,
    QueryPattern,
    require_valid,
)
from .translate import (
    ENTITY,
    MULTIVALUED,
    RELATIONSHIP_MN,
    SchemaTranslation,
)


@dataclass(frozen=True)
class JoinCondition:
    left_alias: str
    left_attribute: str
    right_alias: str
    right_attribute: str


@dataclass
class JoinQuerySpec:
    relations: list[tuple[str, str]]  # (relation name, alias)
    join_conditions: list[JoinCondition]
    selections: list[tuple[str, Predicate]] = field(default_factory=list)
    group_by: Optional[str] = None

    @classmethod
    def from_json_dict(cls, doc: dict) -> "JoinQuerySpec":
        return cls(
            relations=[(r["relation"], r["alias"]) for r in doc["relations"]],
            join_conditions=[
                JoinCondition(j["left_alias"], j["left_attribute"],
                              j["right_alias"], j["right_attribute"])
                for j in doc.get("join_conditions", [])
            ],
            selections=[
                (s["alias"], Predicate.from_json_dict(s["predicate"]))
                for s in doc.get("selections", [])
            ],
            group_by=doc.get("group_by"),
        )


# -- SQL emission --------------------------------------------------------


def _quote_alias(alias: str) -> str:
    if alias.isidentifier():
        return alias
    return '"' + alias.replace('"', '""') + '"'


def _literal(value) -> str:
    if value is None:
        return "NULL"
    if isinstance(value, bool):
        return "TRUE" if value else "FALSE"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, datetime.date):
        return f"DATE '{value.isoformat()}'"
    return "'" + str(value).replace("'", "''") + "'"

_OPS = {"=": "=", "!=": "<>", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


def _predicate_sql(alias: str, pred: Predicate, schema: SchemaGraph) -> str:
    qalias = _quote_alias(alias)
    if pred.target.kind == TARGET_ATTRIBUTE:
        subject = f"{qalias}.{pred.target.name}"
    elif pred.target.kind == TARGET_NEIGHBOR_LABEL:
        edge_name = schema.edge_type(pred.target.edge_type).name
        subject = f"label({qalias}.{_quote_alias(edge_name)})"
    elif pred.target.kind == TARGET_NODE:
        subject = f"{qalias}.id"
    else:
        raise PatternError(f"unknown predicate target {pred.target.kind!r}")
    if pred.op == "contains":
        return f"{subject} CONTAINS {_literal(pred.value)}"
    return f"{subject} {_OPS[pred.op]} {_literal(pred.value)}"


def emit_sql(pattern: QueryPattern, schema: SchemaGraph) -> str:
    """Deterministic text in the general pattern; ent-list is a literal token."""
    require_valid(pattern, schema)
    primary = pattern.primary_occurrence
    qprimary = _quote_alias(primary.alias)

    select_terms = [f"{qprimary}.*"]
    for occ in pattern.occurrences:
        if occ.id != pattern.primary:
            select_terms.append(f"ent-list({_quote_alias(occ.alias)})")
    from_terms = [_quote_alias(o.alias) for o in pattern.occurrences]

    where_terms = []
    for edge in pattern.edges:
        from_alias = _quote_alias(pattern.occurrence(edge.from_occurrence).alias)
        edge_name = _quote_alias(schema.edge_type(edge.edge_type).name)
        ref = f"{from_alias}.{edge_name}"
        where_terms.append(f"source({ref}) = target({ref})")
    for occ in pattern.occurrences:
        for pred in occ.condition.predicates:
            where_terms.append(_predicate_sql(occ.alias, pred, schema))

    lines = [
        "SELECT " + ", ".join(select_terms),
        "FROM " + ", ".join(from_terms),
    ]
    if where_terms:
        lines.append("WHERE " + "\n  AND ".join(where_terms))
    lines.append(f"GROUP BY {qprimary};")
    return "\n".join(lines)


# -- join query -> pattern ----------------------------------------------


def pattern_from_join_query(
    spec: JoinQuerySpec, translation: SchemaTranslation
) -> QueryPattern:
    """3-step translation: joins to edges, selections to conditions, group-by to primary."""
    schema = translation.schema
    tmap = translation.map
    category = {c.relation: c.category for c in translation.classes}
    relations_by_alias: dict[str, str] = {}
    for rel_name, alias in spec.relations:
        if rel_name not in category:
            raise UnknownRelationError(f"unknown relation {rel_name!r}")
        if alias in relations_by_alias:
            raise PatternError(f"duplicate alias {alias!r}")
        relations_by_alias[alias] = rel_name

    occurrences: list[PatternOccurrence] = []
    occ_by_alias: dict[str, str] = {}
    used_display = set()

    def add_occurrence(alias: str, node_type_id: str):
        occ_id = f"o{len(occurrences) + 1}"
        display = schema.node_type(node_type_id).name
        candidate, n = display, 1
        while candidate in used_display:
            n += 1
            candidate = f"{display} ({n})"
        used_display.add(candidate)
        occurrences.append(
            PatternOccurrence(id=occ_id, node_type=node_type_id, alias=candidate)
        )
        occ_by_alias[alias] = occ_id

    for rel_name, alias in spec.relations:
        if category[rel_name] == ENTITY:
            add_occurrence(alias, tmap.entity_node_types[rel_name])
        elif category[rel_name] == MULTIVALUED:
            add_occurrence(alias, tmap.multivalued_node_types[rel_name])
        # m:n relationship aliases carry no occurrence; they become edges.

    edges: list[PatternEdge] = []
    mn_links: dict[str, dict[str, str]] = {}  # mn alias -> {fk attribute: entity alias}

    for jc in spec.join_conditions:
        for left_first in (True, False):
            a_alias = jc.left_alias if left_first else jc.right_alias
            a_attr = jc.left_attribute if left_first else jc.right_attribute
            b_alias = jc.right_alias if left_first else jc.left_alias
            a_rel = relations_by_alias.get(a_alias)
            b_rel = relations_by_alias.get(b_alias)
            if a_rel is None or b_rel is None:
                raise UnknownRelationError(f"join condition references unknown alias")
            if category[a_rel] == RELATIONSHIP_MN and category[b_rel] == ENTITY:
                mn_links.setdefault(a_alias, {})[a_attr] = b_alias
                break
            if category[a_rel] == ENTITY and category[b_rel] == ENTITY:
                edge_id = tmap.fk_edges.get((a_rel, a_attr))
                if edge_id is None:
                    continue
                edges.append(
                    PatternEdge(edge_id, occ_by_alias[a_alias], occ_by_alias[b_alias])
                )
                break
            if category[a_rel] == MULTIVALUED and category[b_rel] == ENTITY:
                # Edge runs entity -> value node type.
                edges.append(
                    PatternEdge(
                        tmap.multivalued_edges[a_rel],
                        occ_by_alias[b_alias],
                        occ_by_alias[a_alias],
                    )
                )
                break
        else:
            raise NoEdgeTypeError(
                f"join condition {jc} does not map to any edge type"
            )

    for rel_name, alias in spec.relations:
        if category[rel_name] != RELATIONSHIP_MN:
            continue
        links = mn_links.get(alias, {})
        if len(links) != 2:
            raise NoEdgeTypeError(
                f"relationship alias {alias!r} must join both of its foreign keys"
            )
        # FK declaration order in the relationship relation fixes the direction.
        src_attr, tgt_attr = tmap.mn_fk_order[rel_name]
        if src_attr not in links or tgt_attr not in links:
            raise NoEdgeTypeError(
                f"relationship alias {alias!r} joins unexpected attributes"
            )
        forward_id = tmap.mn_edges[rel_name]
        edges.append(
            PatternEdge(
                forward_id,
                occ_by_alias[links[src_attr]],
                occ_by_alias[links[tgt_attr]],
            )
        )

    conditions: dict[str, list[Predicate]] = {}
    for alias, pred in spec.selections:
        occ_id = occ_by_alias.get(alias)
        if occ_id is None:
            raise PatternError(f"selection on alias {alias!r} which has no occurrence")
        conditions.setdefault(occ_id, []).append(pred)
    occurrences = [
        PatternOccurrence(
            id=o.id,
            node_type=o.node_type,
            alias=o.alias,
            condition=Condition(tuple(conditions.get(o.id, ()))),
        )
        for o in occurrences
    ]

    if spec.group_by is not None:
        primary = occ_by_alias.get(spec.group_by)
        if primary is None:
            raise PatternError(f"group_by alias {spec.group_by!r} has no occurrence")
    else:
        # No GROUP BY: the first declared alias with an occurrence is primary.
        primary = next(
            occ_by_alias[alias]
            for _, alias in spec.relations
            if alias in occ_by_alias
        )

    pattern = QueryPattern(
        occurrences=tuple(occurrences), edges=tuple(edges), primary=primary
    )
    require_valid(pattern, schema)
    return pattern


def load_pattern(path, schema: SchemaGraph) -> QueryPattern:
    with open(path, encoding="utf-8") as fh:
        pattern = QueryPattern.from_json_dict(json.load(fh))
    require_valid(pattern, schema)
    return pattern
