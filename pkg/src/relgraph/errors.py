"""Exception hierarchy shared by all relgraph modules.

Every error carries a stable machine-readable ``code`` so the HTTP layer and
the CLI can map failures to uniform envelopes without string matching.
"""

from __future__ import annotations


class RelGraphError(Exception):
    """Base class; ``code`` identifies the error kind, ``detail`` is optional context."""

    code = "error"

    def __init__(self, message: str, detail: object = None):
        super().__init__(message)
        self.message = message
        self.detail = detail

    def envelope(self) -> dict:
        return {"code": self.code, "message": self.message, "detail": self.detail}


class UnknownTypeError(RelGraphError):
    code = "unknown_type"


class UnknownNodeError(RelGraphError):
    code = "unknown_node"


class UnknownEdgeTypeError(RelGraphError):
    code = "unknown_edge_type"


class TypeMismatchError(RelGraphError):
    code = "type_mismatch"


class SchemaError(RelGraphError):
    code = "schema_error"


class ManifestError(RelGraphError):
    code = "manifest_error"


class OverrideError(RelGraphError):
    code = "override_error"


class UnclassifiableRelationError(RelGraphError):
    code = "unclassifiable_relation"


class DanglingReferenceError(RelGraphError):
    code = "dangling_reference"


class CoercionError(RelGraphError):
    code = "coercion_error"


class PredicateError(RelGraphError):
    code = "predicate_error"


class UnknownOccurrenceError(RelGraphError):
    code = "unknown_occurrence"


class PatternError(RelGraphError):
    code = "pattern_error"


class HistoryError(RelGraphError):
    code = "history_error"


class RelationAttributeError(RelGraphError):
    """A graph-relation operation referenced an attribute not in the relation."""

    code = "attribute_error"


class UnknownColumnError(RelGraphError):
    code = "unknown_column"


class UnknownRowError(RelGraphError):
    code = "unknown_row"


class InvalidPivotError(RelGraphError):
    code = "invalid_pivot"


class InvalidColumnError(RelGraphError):
    code = "invalid_column"


class OutOfRangeError(RelGraphError):
    code = "out_of_range"


class UnknownRelationError(RelGraphError):
    code = "unknown_relation"


class NoEdgeTypeError(RelGraphError):
    code = "no_edge_type"


class UnknownSessionError(RelGraphError):
    code = "unknown_session"


class NoTableError(RelGraphError):
    """The session has no table yet (no Open action performed)."""

    code = "no_table"


class ActionError(RelGraphError):
    code = "invalid_action"
