"""Format transformation: a pattern plus its match result becomes an ETable.

Rows are keyed by distinct primary-type nodes. Columns come in three kinds:
base attributes of the primary type, participating columns (one per
non-primary occurrence), and neighbor columns (one per schema edge leaving
the primary type, regardless of the pattern).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import UnknownColumnError
from .model import InstanceGraph, encode_value, render_value
from .pattern import QueryPattern
from . import algebra

BASE = "base_attribute"
PARTICIPATING = "participating"
NEIGHBOR = "neighbor"

DEFAULT_PAGE_SIZE = 50


@dataclass(frozen=True)
class EntityRef:
    node: str
    label: str

    def to_json_dict(self) -> dict:
        return {"node": self.node, "label": self.label}


@dataclass(frozen=True)
class ColumnSpec:
    id: str
    header: str
    kind: str
    visible: bool = True
    attribute: str | None = None  # base columns
    occurrence: str | None = None  # participating columns
    edge_type: str | None = None  # neighbor columns


@dataclass(frozen=True)
class Row:
    key: str
    cells: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ETable:
    pattern: QueryPattern
    columns: tuple[ColumnSpec, ...]
    rows: tuple[Row, ...]
    total_row_count: int

    def column(self, column_id: str) -> ColumnSpec:
        for col in self.columns:
            if col.id == column_id:
                return col
        raise UnknownColumnError(f"unknown column {column_id!r}")

    def row(self, key: str) -> Row:
        for row in self.rows:
            if row.key == key:
                return row
        from .errors import UnknownRowError

        raise UnknownRowError(f"no row with key {key!r}")


def materialize(pattern: QueryPattern, graph: InstanceGraph) -> ETable:
    """Build the full ETable for a pattern: one row per matching primary node."""
    schema = graph.schema
    primary = pattern.primary_occurrence
    primary_type = schema.node_type(primary.node_type)

    columns: list[ColumnSpec] = []
    for attr in primary_type.attributes:
        columns.append(
            ColumnSpec(id=f"a:{attr.name}", header=attr.name, kind=BASE, attribute=attr.name)
        )
    for occ in pattern.occurrences:
        if occ.id == pattern.primary:
            continue
        columns.append(
            ColumnSpec(
                id=f"p:{occ.id}", header=occ.alias, kind=PARTICIPATING, occurrence=occ.id
            )
        )
    for et in schema.edge_types_from(primary.node_type):
        columns.append(
            ColumnSpec(id=f"n:{et.id}", header=et.name, kind=NEIGHBOR, edge_type=et.id)
        )

    relation = algebra.match(pattern, graph)
    primary_idx = relation.index_of(pattern.primary)
    per_key: dict[str, list[tuple[str, ...]]] = {}
    for t in relation.tuples:
        per_key.setdefault(t[primary_idx], []).append(t)

    occurrence_idx = {occ.id: relation.index_of(occ.id) for occ in pattern.occurrences}

    def refs(node_ids) -> tuple[EntityRef, ...]:
        return tuple(EntityRef(nid, graph.label(nid)) for nid in sorted(set(node_ids)))

    rows = []
    for key in sorted(per_key):
        node = graph.node(key)
        cells: dict = {}
        for col in columns:
            if col.kind == BASE:
                cells[col.id] = node.values.get(col.attribute)
            elif col.kind == PARTICIPATING:
                idx = occurrence_idx[col.occurrence]
                cells[col.id] = refs(t[idx] for t in per_key[key])
            else:
                cells[col.id] = refs(graph.neighbor_ids(key, col.edge_type))
        rows.append(Row(key=key, cells=cells))

    return ETable(
        pattern=pattern,
        columns=tuple(columns),
        rows=tuple(rows),
        total_row_count=len(rows),
    )


def sort_rows(etable: ETable, column_id: str, direction: str = "asc") -> ETable:
    """Base columns sort by value (nulls last); ref columns by cell cardinality."""
    col = etable.column(column_id)
    if direction not in ("asc", "desc"):
        raise UnknownColumnError(f"unknown sort direction {direction!r}")
    descending = direction == "desc"

    if col.kind == BASE:
        def sort_key(row: Row):
            value = row.cells[column_id]
            if value is None:
                return (1, None)
            if descending:
                return (0, _Reversed(value))
            return (0, value)
        # Nulls stay last in both directions.
        rows = sorted(etable.rows, key=lambda r: (sort_key(r), r.key))
    else:
        def count_key(row: Row):
            n = len(row.cells[column_id])
            return (-n if descending else n, row.key)
        rows = sorted(etable.rows, key=count_key)
    return replace(etable, rows=tuple(rows))


class _Reversed:
    """Inverts comparison so nulls-last works under descending sorts."""

    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __lt__(self, other):
        return other.value < self.value

    def __eq__(self, other):
        return self.value == other.value


def set_column_visibility(etable: ETable, column_id: str, visible: bool) -> ETable:
    etable.column(column_id)
    columns = tuple(
        replace(c, visible=visible) if c.id == column_id else c for c in etable.columns
    )
    return replace(etable, columns=columns)


def paginate(etable: ETable, page: int, page_size: int) -> tuple[list[Row], int]:
    """Rows of one page plus the total row count; out-of-range pages are empty."""
    if page < 1 or page_size < 1:
        from .errors import OutOfRangeError

        raise OutOfRangeError("page and page_size must be >= 1")
    start = (page - 1) * page_size
    return list(etable.rows[start : start + page_size]), etable.total_row_count


# -- serialization -------------------------------------------------------


def cell_to_json(cell):
    if isinstance(cell, tuple):
        return {"refs": [r.to_json_dict() for r in cell], "count": len(cell)}
    return encode_value(cell)


def etable_to_json_dict(
    etable: ETable, page: int = 1, page_size: int = DEFAULT_PAGE_SIZE
) -> dict:
    rows, total = paginate(etable, page, page_size)
    return {
        "columns": [
            {"id": c.id, "header": c.header, "kind": c.kind, "visible": c.visible}
            for c in etable.columns
        ],
        "rows": [
            {
                "key": r.key,
                "cells": {cid: cell_to_json(cell) for cid, cell in r.cells.items()},
            }
            for r in rows
        ],
        "page": page,
        "page_size": page_size,
        "total_row_count": total,
    }


def etable_to_csv(etable: ETable, visible_only: bool = True) -> str:
    """Flat CSV export; ref sets flatten to 'label; label; ...'."""
    import csv
    import io

    columns = [c for c in etable.columns if c.visible or not visible_only]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key"] + [c.header for c in columns])
    for row in etable.rows:
        out = [row.key]
        for c in columns:
            cell = row.cells[c.id]
            if isinstance(cell, tuple):
                out.append("; ".join(r.label for r in cell))
            elif cell is None:
                out.append("")
            else:
                out.append(render_value(cell))
        writer.writerow(out)
    return buf.getvalue()
