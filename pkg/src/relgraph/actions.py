"""User-level actions mapped onto primitive-operator sequences.

A session owns the operator history and the presentation state (sort,
visibility, page). The served table is always materialize(replay(history))
with presentation applied; failing actions leave the session untouched.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field
from typing import Optional

from . import etable as etable_mod
from .errors import (
    ActionError,
    InvalidColumnError,
    InvalidPivotError,
    NoTableError,
    OutOfRangeError,
    UnknownColumnError,
)
from .etable import BASE, DEFAULT_PAGE_SIZE, NEIGHBOR, PARTICIPATING, ETable
from .model import InstanceGraph
from .pattern import (
    Condition,
    OperatorRecord,
    QueryPattern,
    record,
    replay,
)


@dataclass
class Presentation:
    sort: Optional[tuple[str, str]] = None  # (column id, direction)
    hidden: set[str] = field(default_factory=set)
    page: int = 1
    page_size: int = DEFAULT_PAGE_SIZE

    def copy(self) -> "Presentation":
        return Presentation(self.sort, set(self.hidden), self.page, self.page_size)


class Session:
    def __init__(self, graph: InstanceGraph, session_id: Optional[str] = None,
                 page_size: int = DEFAULT_PAGE_SIZE):
        self.id = session_id or secrets.token_hex(16)
        self.graph = graph
        self.history: list[OperatorRecord] = []
        self.presentation = Presentation(page_size=page_size)

    # -- derived state ---------------------------------------------------

    def current_pattern(self) -> QueryPattern:
        if not self.history:
            raise NoTableError("no table open in this session")
        return replay(self.graph.schema, self.history)

    def current_etable(self) -> ETable:
        """The served table, recomputed from history plus presentation."""
        table = etable_mod.materialize(self.current_pattern(), self.graph)
        for column_id in sorted(self.presentation.hidden):
            try:
                table = etable_mod.set_column_visibility(table, column_id, False)
            except UnknownColumnError:
                continue
        if self.presentation.sort is not None:
            column_id, direction = self.presentation.sort
            table = etable_mod.sort_rows(table, column_id, direction)
        return table

    # -- internal commit helper ------------------------------------------

    def _commit(self, history, presentation) -> ETable:
        # Materialize before mutating so a failure leaves the session as-is.
        saved_history, saved_pres = self.history, self.presentation
        self.history, self.presentation = history, presentation
        try:
            return self.current_etable()
        except Exception:
            self.history, self.presentation = saved_history, saved_pres
            raise

    # -- user-level actions ----------------------------------------------

    def act_open(self, node_type_id: str) -> ETable:
        rec = record(self.graph.schema, None, "Initiate", {"node_type": node_type_id})
        return self._commit([rec], Presentation(page_size=self.presentation.page_size))

    def act_filter(self, condition: Condition) -> ETable:
        pattern = self.current_pattern()
        rec = record(
            self.graph.schema, pattern, "Select",
            {"predicates": condition.to_json_list()},
        )
        return self._commit(self.history + [rec], self.presentation.copy())

    def act_pivot(self, column_id: str) -> ETable:
        table = self.current_etable()
        col = table.column(column_id)
        pattern = self.current_pattern()
        if col.kind == NEIGHBOR:
            rec = record(self.graph.schema, pattern, "Add", {"edge_type": col.edge_type})
        elif col.kind == PARTICIPATING:
            rec = record(self.graph.schema, pattern, "Shift", {"occurrence": col.occurrence})
        else:
            raise InvalidPivotError(f"cannot pivot on base-attribute column {column_id!r}")
        return self._commit(
            self.history + [rec], Presentation(page_size=self.presentation.page_size)
        )

    def act_single(self, node_id: str) -> ETable:
        node = self.graph.node(node_id)
        schema = self.graph.schema
        open_rec = record(schema, None, "Initiate", {"node_type": node.node_type})
        key_pred = {"target": {"kind": "node"}, "op": "=", "value": node_id}
        select_rec = record(
            schema, open_rec.pattern, "Select", {"predicates": [key_pred]}
        )
        return self._commit(
            [open_rec, select_rec], Presentation(page_size=self.presentation.page_size)
        )

    def act_seeall(self, row_key: str, column_id: str) -> ETable:
        table = self.current_etable()
        table.row(row_key)
        col = table.column(column_id)
        if col.kind == BASE:
            raise InvalidColumnError(f"column {column_id!r} holds no entity references")
        schema = self.graph.schema
        pattern = self.current_pattern()
        key_pred = {"target": {"kind": "node"}, "op": "=", "value": row_key}
        select_rec = record(schema, pattern, "Select", {"predicates": [key_pred]})
        if col.kind == NEIGHBOR:
            second = record(schema, select_rec.pattern, "Add", {"edge_type": col.edge_type})
        else:
            second = record(schema, select_rec.pattern, "Shift", {"occurrence": col.occurrence})
        return self._commit(
            self.history + [select_rec, second],
            Presentation(page_size=self.presentation.page_size),
        )

    def act_revert(self, step: int) -> ETable:
        if not 1 <= step <= len(self.history):
            raise OutOfRangeError(
                f"step {step} out of range 1..{len(self.history)}"
            )
        return self._commit(
            self.history[:step], Presentation(page_size=self.presentation.page_size)
        )

    def act_sort(self, column_id: str, direction: str = "asc") -> ETable:
        table = self.current_etable()
        table.column(column_id)
        if direction not in ("asc", "desc"):
            raise ActionError(f"unknown sort direction {direction!r}")
        pres = self.presentation.copy()
        pres.sort = (column_id, direction)
        return self._commit(list(self.history), pres)

    def act_set_visibility(self, column_id: str, visible: bool) -> ETable:
        table = self.current_etable()
        table.column(column_id)
        pres = self.presentation.copy()
        if visible:
            pres.hidden.discard(column_id)
        else:
            pres.hidden.add(column_id)
        return self._commit(list(self.history), pres)


ACTION_KINDS = (
    "Open", "Filter", "Pivot", "Single", "Seeall", "Sort", "SetVisibility", "Revert",
)


def apply_action(session: Session, envelope: dict) -> ETable:
    """Dispatch one JSON action envelope: {"kind": ..., "args": {...}}."""
    if not isinstance(envelope, dict) or "kind" not in envelope:
        raise ActionError("action envelope must be an object with a 'kind'")
    kind = envelope["kind"]
    args = envelope.get("args", {})
    if not isinstance(args, dict):
        raise ActionError("action args must be an object")
    try:
        if kind == "Open":
            return session.act_open(args["node_type"])
        if kind == "Filter":
            return session.act_filter(Condition.from_json_list(args["predicates"]))
        if kind == "Pivot":
            return session.act_pivot(args["column"])
        if kind == "Single":
            return session.act_single(args["node"])
        if kind == "Seeall":
            return session.act_seeall(args["row"], args["column"])
        if kind == "Sort":
            return session.act_sort(args["column"], args.get("direction", "asc"))
        if kind == "SetVisibility":
            return session.act_set_visibility(args["column"], bool(args["visible"]))
        if kind == "Revert":
            return session.act_revert(int(args["step"]))
    except KeyError as exc:
        raise ActionError(f"missing action argument {exc.args[0]!r}") from None
    raise ActionError(f"unknown action kind {kind!r}")
