"""Relational dump ingestion: manifest + CSV tables -> schema and instance graphs.

Relations are classified into entity, many-to-many relationship, and
multivalued-attribute categories from their key structure; the classification
drives node/edge type creation. Categorical attributes are opt-in through the
manifest, with an advisory report listing low-cardinality candidates.
"""

from __future__ import annotations

import csv
import datetime
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import (
    CoercionError,
    DanglingReferenceError,
    ManifestError,
    OverrideError,
    UnclassifiableRelationError,
)
from .model import (
    AttributeDef,
    Edge,
    EdgeType,
    InstanceGraph,
    Node,
    NodeType,
    SchemaGraph,
    render_value,
)

ENTITY = "entity"
RELATIONSHIP_MN = "relationship_mn"
MULTIVALUED = "multivalued_attribute"


@dataclass(frozen=True)
class ForeignKey:
    attribute: str
    references: str


@dataclass
class RelationDef:
    name: str
    attributes: list[AttributeDef]
    primary_key: list[str]
    foreign_keys: list[ForeignKey]

    def attribute_names(self) -> list[str]:
        return [a.name for a in self.attributes]

    def fk_for(self, attribute: str) -> Optional[ForeignKey]:
        for fk in self.foreign_keys:
            if fk.attribute == attribute:
                return fk
        return None


@dataclass
class RelationManifest:
    relations: list[RelationDef]
    overrides: dict[str, str] = field(default_factory=dict)
    categorical_attributes: list[tuple[str, str]] = field(default_factory=list)
    categorical_cardinality_threshold: int = 30

    def relation(self, name: str) -> RelationDef:
        for rel in self.relations:
            if rel.name == name:
                return rel
        raise ManifestError(f"unknown relation {name!r}")

    def check(self) -> None:
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise ManifestError("relation names must be unique")
        for rel in self.relations:
            attr_names = rel.attribute_names()
            if not rel.primary_key:
                raise ManifestError(f"relation {rel.name!r} has no primary key")
            for pk in rel.primary_key:
                if pk not in attr_names:
                    raise ManifestError(f"relation {rel.name!r}: PK attribute {pk!r} missing")
            for fk in rel.foreign_keys:
                if fk.attribute not in attr_names:
                    raise ManifestError(
                        f"relation {rel.name!r}: FK attribute {fk.attribute!r} missing"
                    )
                if fk.references not in names:
                    raise ManifestError(
                        f"relation {rel.name!r}: FK references unknown relation {fk.references!r}"
                    )
                target = self.relation(fk.references)
                if len(target.primary_key) != 1:
                    raise ManifestError(
                        f"relation {rel.name!r}: FK {fk.attribute!r} must reference a "
                        f"single-attribute primary key"
                    )
        for rel_name, attr in self.categorical_attributes:
            rel = self.relation(rel_name)
            if attr not in rel.attribute_names():
                raise ManifestError(
                    f"categorical attribute {attr!r} not in relation {rel_name!r}"
                )
        for rel_name, attr in self.overrides.items():
            rel = self.relation(rel_name)
            if attr not in rel.attribute_names():
                raise OverrideError(f"override {rel_name!r}->{attr!r}: no such attribute")

    @classmethod
    def from_json_dict(cls, doc: dict) -> "RelationManifest":
        relations = []
        for rd in doc["relations"]:
            relations.append(
                RelationDef(
                    name=rd["name"],
                    attributes=[AttributeDef(a["name"], a["kind"]) for a in rd["attributes"]],
                    primary_key=list(rd["primary_key"]),
                    foreign_keys=[
                        ForeignKey(fk["attribute"], fk["references"])
                        for fk in rd.get("foreign_keys", [])
                    ],
                )
            )
        manifest = cls(
            relations=relations,
            overrides=dict(doc.get("overrides", {})),
            categorical_attributes=[tuple(p) for p in doc.get("categorical_attributes", [])],
            categorical_cardinality_threshold=doc.get("categorical_cardinality_threshold", 30),
        )
        manifest.check()
        return manifest

    @classmethod
    def load(cls, path) -> "RelationManifest":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass(frozen=True)
class RelationClass:
    relation: str
    category: str


def classify_relations(manifest: RelationManifest) -> list[RelationClass]:
    """Assign each relation to exactly one of the three categories."""
    manifest.check()
    entity_names = set()
    for rel in manifest.relations:
        fk_attrs = {fk.attribute for fk in rel.foreign_keys}
        if not (set(rel.primary_key) & fk_attrs):
            entity_names.add(rel.name)
    out = []
    for rel in manifest.relations:
        fk_attrs = {fk.attribute for fk in rel.foreign_keys}
        if rel.name in entity_names:
            out.append(RelationClass(rel.name, ENTITY))
            continue
        pk = rel.primary_key
        if (
            len(pk) == 2
            and set(pk) <= fk_attrs
            and all(rel.fk_for(a).references in entity_names for a in pk)
        ):
            out.append(RelationClass(rel.name, RELATIONSHIP_MN))
            continue
        if (
            len(rel.attributes) == 2
            and set(pk) == set(rel.attribute_names())
            and len(fk_attrs) == 1
            and next(iter(rel.foreign_keys)).references in entity_names
        ):
            out.append(RelationClass(rel.name, MULTIVALUED))
            continue
        raise UnclassifiableRelationError(
            f"relation {rel.name!r} matches no category",
            detail={
                "primary_key": pk,
                "foreign_keys": sorted(fk_attrs),
                "attribute_count": len(rel.attributes),
            },
        )
    return out


@dataclass
class ColumnStats:
    kind: str
    distinct: int = 0
    nulls: int = 0
    total: int = 0


def choose_label_attribute(
    relation: RelationDef,
    column_stats: Optional[dict[str, ColumnStats]] = None,
    override: Optional[str] = None,
) -> str:
    """Pick the display-label attribute: override first, then a heuristic score."""
    if override is not None:
        if override not in relation.attribute_names():
            raise OverrideError(
                f"override for {relation.name!r} names unknown attribute {override!r}"
            )
        return override
    stats = column_stats or {}
    candidates = [a for a in relation.attributes if a.name not in relation.primary_key]
    if not candidates:
        return relation.primary_key[0]

    def score(attr: AttributeDef) -> tuple:
        st = stats.get(attr.name)
        distinct_ratio = st.distinct / st.total if st and st.total else 0.0
        null_ratio = st.nulls / st.total if st and st.total else 0.0
        return (1 if attr.kind == "text" else 0, distinct_ratio - null_ratio)

    best = max(candidates, key=lambda a: (score(a), -relation.attributes.index(a)))
    return best.name


def _derived_type_name(attribute: str) -> str:
    name = attribute[:1].upper() + attribute[1:]
    if not name.endswith("s"):
        name += "s"
    return name


@dataclass
class TranslationMap:
    """Correspondence between manifest elements and graph schema elements."""

    entity_node_types: dict[str, str] = field(default_factory=dict)
    multivalued_node_types: dict[str, str] = field(default_factory=dict)
    categorical_node_types: dict[tuple[str, str], str] = field(default_factory=dict)
    fk_edges: dict[tuple[str, str], str] = field(default_factory=dict)
    mn_edges: dict[str, str] = field(default_factory=dict)
    mn_fk_order: dict[str, tuple[str, str]] = field(default_factory=dict)
    multivalued_edges: dict[str, str] = field(default_factory=dict)
    categorical_edges: dict[tuple[str, str], str] = field(default_factory=dict)


@dataclass
class SchemaTranslation:
    schema: SchemaGraph
    map: TranslationMap
    classes: list[RelationClass]


class _EdgeNamer:
    """Edge names come from the target node type, de-duplicated per source."""

    def __init__(self):
        self.used: set[tuple[str, str]] = set()

    def name(self, source_type: str, target_name: str) -> str:
        candidate = target_name
        n = 1
        while (source_type, candidate) in self.used:
            n += 1
            candidate = f"{target_name} ({n})"
        self.used.add((source_type, candidate))
        return candidate


def translate_schema(
    manifest: RelationManifest,
    column_stats: Optional[dict[str, dict[str, ColumnStats]]] = None,
) -> SchemaTranslation:
    classes = classify_relations(manifest)
    by_category = {c.relation: c.category for c in classes}
    stats = column_stats or {}
    tmap = TranslationMap()
    node_types: list[NodeType] = []
    edge_types: list[EdgeType] = []
    namer = _EdgeNamer()

    for rel in manifest.relations:
        if by_category[rel.name] != ENTITY:
            continue
        label = choose_label_attribute(rel, stats.get(rel.name), manifest.overrides.get(rel.name))
        node_types.append(
            NodeType(
                id=rel.name,
                name=rel.name,
                attributes=tuple(rel.attributes),
                label_attribute=label,
                origin="entity_table",
            )
        )
        tmap.entity_node_types[rel.name] = rel.name

    def add_edge_pair(source: str, target: str, origin: str) -> str:
        """Create an edge type plus its reverse; returns the forward edge id."""
        fwd_name = namer.name(source, target)
        rev_name = namer.name(target, source)
        fwd_id = f"{source}->{fwd_name}"
        rev_id = f"{target}->{rev_name}"
        edge_types.append(
            EdgeType(fwd_id, fwd_name, source, target, origin, reverse_of=rev_id)
        )
        edge_types.append(
            EdgeType(rev_id, rev_name, target, source, origin, reverse_of=fwd_id)
        )
        return fwd_id

    # 1:1 / 1:n relationships from foreign keys between entity relations.
    for rel in manifest.relations:
        if by_category[rel.name] != ENTITY:
            continue
        for fk in rel.foreign_keys:
            if by_category[fk.references] != ENTITY:
                raise ManifestError(
                    f"entity relation {rel.name!r} has FK to non-entity {fk.references!r}"
                )
            tmap.fk_edges[(rel.name, fk.attribute)] = add_edge_pair(
                rel.name, fk.references, "fk_one_to_many"
            )

    # m:n relationship relations; FK declaration order fixes source and target.
    for rel in manifest.relations:
        if by_category[rel.name] != RELATIONSHIP_MN:
            continue
        fks = [rel.fk_for(a) for a in rel.primary_key]
        tmap.mn_edges[rel.name] = add_edge_pair(
            fks[0].references, fks[1].references, "mn_relationship"
        )
        tmap.mn_fk_order[rel.name] = (fks[0].attribute, fks[1].attribute)

    # Multivalued-attribute relations become a node type plus an edge pair.
    for rel in manifest.relations:
        if by_category[rel.name] != MULTIVALUED:
            continue
        fk = rel.foreign_keys[0]
        value_attr = next(a for a in rel.attributes if a.name != fk.attribute)
        type_name = _derived_type_name(value_attr.name)
        node_types.append(
            NodeType(
                id=type_name,
                name=type_name,
                attributes=(value_attr,),
                label_attribute=value_attr.name,
                origin="multivalued_attribute",
            )
        )
        tmap.multivalued_node_types[rel.name] = type_name
        tmap.multivalued_edges[rel.name] = add_edge_pair(
            fk.references, type_name, "multivalued_attribute"
        )

    # Opt-in categorical attributes of entity relations.
    for rel_name, attr_name in manifest.categorical_attributes:
        rel = manifest.relation(rel_name)
        if by_category[rel.name] != ENTITY:
            raise ManifestError(
                f"categorical attribute on non-entity relation {rel_name!r}"
            )
        attr = next(a for a in rel.attributes if a.name == attr_name)
        type_name = _derived_type_name(attr.name)
        node_types.append(
            NodeType(
                id=type_name,
                name=type_name,
                attributes=(attr,),
                label_attribute=attr.name,
                origin="categorical_attribute",
            )
        )
        tmap.categorical_node_types[(rel_name, attr_name)] = type_name
        tmap.categorical_edges[(rel_name, attr_name)] = add_edge_pair(
            rel.name, type_name, "categorical_attribute"
        )

    schema = SchemaGraph(node_types, edge_types)
    return SchemaTranslation(schema=schema, map=tmap, classes=classes)


def build_schema_graph(
    manifest: RelationManifest,
    column_stats: Optional[dict[str, dict[str, ColumnStats]]] = None,
) -> SchemaGraph:
    return translate_schema(manifest, column_stats).schema


# -- CSV ingestion -------------------------------------------------------


@dataclass
class Issue:
    kind: str
    relation: str
    row: int
    message: str


def coerce_cell(raw: Optional[str], kind: str):
    if raw is None or raw == "":
        return None
    if kind == "text":
        return raw
    if kind == "integer":
        return int(raw)
    if kind == "real":
        return float(raw)
    if kind == "boolean":
        low = raw.strip().lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind == "date":
        return datetime.date.fromisoformat(raw.strip())
    raise ValueError(f"unknown kind {kind!r}")


def read_tables(
    data_dir, manifest: RelationManifest, issues: Optional[list[Issue]] = None
) -> dict[str, list[dict]]:
    """Read ``<relation>.csv`` per manifest relation; cells coerced per kind.

    Unparseable cells become None and are reported; rows with an unparseable
    primary-key cell are skipped.
    """
    data_dir = Path(data_dir)
    issues = issues if issues is not None else []
    tables: dict[str, list[dict]] = {}
    for rel in manifest.relations:
        path = data_dir / f"{rel.name}.csv"
        if not path.exists():
            raise ManifestError(f"missing table file {path}")
        rows: list[dict] = []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            kinds = {a.name: a.kind for a in rel.attributes}
            for i, raw_row in enumerate(reader, start=2):
                row: dict = {}
                skip = False
                for name, kind in kinds.items():
                    try:
                        row[name] = coerce_cell(raw_row.get(name), kind)
                    except (ValueError, TypeError) as exc:
                        issues.append(Issue("coercion", rel.name, i, f"{name}: {exc}"))
                        row[name] = None
                    if row[name] is None and name in rel.primary_key:
                        skip = True
                if skip:
                    issues.append(Issue("skipped_row", rel.name, i, "null primary key cell"))
                    continue
                rows.append(row)
        tables[rel.name] = rows
    return tables


def compute_column_stats(
    manifest: RelationManifest, tables: dict[str, list[dict]]
) -> dict[str, dict[str, ColumnStats]]:
    stats: dict[str, dict[str, ColumnStats]] = {}
    for rel in manifest.relations:
        rows = tables.get(rel.name, [])
        per_attr = {}
        for attr in rel.attributes:
            values = [r.get(attr.name) for r in rows]
            non_null = [v for v in values if v is not None]
            per_attr[attr.name] = ColumnStats(
                kind=attr.kind,
                distinct=len(set(non_null)),
                nulls=len(values) - len(non_null),
                total=len(values),
            )
        stats[rel.name] = per_attr
    return stats


def categorical_candidates(
    manifest: RelationManifest, stats: dict[str, dict[str, ColumnStats]]
) -> list[dict]:
    """Advisory list of low-cardinality entity attributes (below the threshold)."""
    classes = {c.relation: c.category for c in classify_relations(manifest)}
    out = []
    for rel in manifest.relations:
        if classes[rel.name] != ENTITY:
            continue
        fk_attrs = {fk.attribute for fk in rel.foreign_keys}
        for attr in rel.attributes:
            if attr.name in rel.primary_key or attr.name in fk_attrs:
                continue
            st = stats.get(rel.name, {}).get(attr.name)
            if st and st.total and st.distinct < manifest.categorical_cardinality_threshold:
                out.append(
                    {"relation": rel.name, "attribute": attr.name, "distinct": st.distinct}
                )
    return out


def node_id(type_name: str, key_value) -> str:
    return f"{type_name}:{render_value(key_value)}"


def build_instance_graph(
    translation: SchemaTranslation,
    manifest: RelationManifest,
    tables: dict[str, list[dict]],
    strict: bool = False,
    issues: Optional[list[Issue]] = None,
) -> InstanceGraph:
    """Materialize nodes and edges from ingested rows; mirrors every edge."""
    issues = issues if issues is not None else []
    by_category = {c.relation: c.category for c in translation.classes}
    tmap = translation.map
    schema = translation.schema
    nodes: dict[str, Node] = {}
    edge_keys: set[tuple[str, str, str]] = set()

    def problem(kind: str, relation: str, row_no: int, message: str):
        if strict:
            raise DanglingReferenceError(f"{relation} row {row_no}: {message}")
        issues.append(Issue(kind, relation, row_no, message))

    # Entity nodes first; every edge below checks endpoints against them.
    for rel in manifest.relations:
        if by_category[rel.name] != ENTITY:
            continue
        pk = rel.primary_key[0]
        for i, row in enumerate(tables.get(rel.name, []), start=1):
            nid = node_id(rel.name, row[pk])
            nodes[nid] = Node(id=nid, node_type=rel.name, values=dict(row))

    def add_edge_pair_instances(fwd_type_id: str, source_id: str, target_id: str):
        fwd = schema.edge_type(fwd_type_id)
        edge_keys.add((fwd.id, source_id, target_id))
        if fwd.reverse_of:
            edge_keys.add((fwd.reverse_of, target_id, source_id))

    # FK edges between entity rows.
    for rel in manifest.relations:
        if by_category[rel.name] != ENTITY:
            continue
        pk = rel.primary_key[0]
        for i, row in enumerate(tables.get(rel.name, []), start=1):
            src = node_id(rel.name, row[pk])
            for fk in rel.foreign_keys:
                value = row.get(fk.attribute)
                if value is None:
                    continue
                tgt = node_id(fk.references, value)
                if tgt not in nodes:
                    problem("dangling_fk", rel.name, i, f"{fk.attribute}={value!r} unmatched")
                    continue
                add_edge_pair_instances(tmap.fk_edges[(rel.name, fk.attribute)], src, tgt)

    # m:n relationship rows.
    for rel in manifest.relations:
        if by_category[rel.name] != RELATIONSHIP_MN:
            continue
        fks = [rel.fk_for(a) for a in rel.primary_key]
        for i, row in enumerate(tables.get(rel.name, []), start=1):
            src = node_id(fks[0].references, row[fks[0].attribute])
            tgt = node_id(fks[1].references, row[fks[1].attribute])
            if src not in nodes or tgt not in nodes:
                problem("dangling_fk", rel.name, i, "unmatched relationship endpoint")
                continue
            add_edge_pair_instances(tmap.mn_edges[rel.name], src, tgt)

    # Multivalued rows: one node per distinct value, edges to owning entities.
    for rel in manifest.relations:
        if by_category[rel.name] != MULTIVALUED:
            continue
        fk = rel.foreign_keys[0]
        value_attr = next(a for a in rel.attributes if a.name != fk.attribute)
        type_name = tmap.multivalued_node_types[rel.name]
        for i, row in enumerate(tables.get(rel.name, []), start=1):
            value = row.get(value_attr.name)
            if value is None:
                problem("null_value", rel.name, i, "null multivalued value")
                continue
            src = node_id(fk.references, row[fk.attribute])
            if src not in nodes:
                problem("dangling_fk", rel.name, i, f"{fk.attribute} unmatched")
                continue
            vid = node_id(type_name, value)
            if vid not in nodes:
                nodes[vid] = Node(id=vid, node_type=type_name, values={value_attr.name: value})
            add_edge_pair_instances(tmap.multivalued_edges[rel.name], src, vid)

    # Categorical values: one node per distinct value.
    for (rel_name, attr_name), type_name in tmap.categorical_node_types.items():
        rel = manifest.relation(rel_name)
        pk = rel.primary_key[0]
        for i, row in enumerate(tables.get(rel_name, []), start=1):
            value = row.get(attr_name)
            if value is None:
                continue
            src = node_id(rel_name, row[pk])
            vid = node_id(type_name, value)
            if vid not in nodes:
                nodes[vid] = Node(id=vid, node_type=type_name, values={attr_name: value})
            add_edge_pair_instances(tmap.categorical_edges[(rel_name, attr_name)], src, vid)

    edges = [
        Edge(id=f"{etype}#{src}=>{tgt}", edge_type=etype, source=src, target=tgt)
        for etype, src, tgt in sorted(edge_keys)
    ]
    return InstanceGraph(schema, nodes.values(), edges)


@dataclass
class TranslationResult:
    graph: InstanceGraph
    translation: SchemaTranslation
    issues: list[Issue]
    categorical_advisory: list[dict]


def translate(data_dir, manifest: RelationManifest, strict: bool = False) -> TranslationResult:
    """Full pipeline: read CSVs, build schema with label heuristics, build instances."""
    issues: list[Issue] = []
    tables = read_tables(data_dir, manifest, issues)
    if strict and issues:
        first = issues[0]
        raise CoercionError(f"{first.relation} row {first.row}: {first.message}")
    stats = compute_column_stats(manifest, tables)
    translation = translate_schema(manifest, stats)
    graph = build_instance_graph(translation, manifest, tables, strict=strict, issues=issues)
    advisory = categorical_candidates(manifest, stats)
    return TranslationResult(graph, translation, issues, advisory)
