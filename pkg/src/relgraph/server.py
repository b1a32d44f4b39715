"""HTTP service: loads a TGDB file, hosts sessions, serves the JSON API.

The instance graph is shared read-only across sessions; per-session actions
are serialized with a lock so concurrent requests on one session keep the
per-session ordering guarantee.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import etable as etable_mod
from .actions import Session, apply_action
from .errors import (
    OutOfRangeError,
    RelGraphError,
    UnknownColumnError,
    UnknownRowError,
    UnknownSessionError,
)
from .etable import DEFAULT_PAGE_SIZE
from .model import InstanceGraph
from .pattern import describe_record
from .sqlbridge import emit_sql


@dataclass
class ServerConfig:
    tgdb_path: str
    host: str = "127.0.0.1"
    port: int = 8000
    page_size: int = DEFAULT_PAGE_SIZE
    session_idle_timeout: float = 0.0  # seconds; 0 = never evict
    static_dir: Optional[str] = None

    def __post_init__(self):
        if self.page_size < 1:
            raise ValueError("page_size must be >= 1")
        if self.session_idle_timeout < 0:
            raise ValueError("session idle timeout must be >= 0")


class SessionStore:
    def __init__(self, graph: InstanceGraph, page_size: int, idle_timeout: float = 0.0):
        self._graph = graph
        self._page_size = page_size
        self._idle_timeout = idle_timeout
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._last_seen: dict[str, float] = {}

    def create(self) -> Session:
        session = Session(self._graph, page_size=self._page_size)
        with self._lock:
            self._sessions[session.id] = session
            self._locks[session.id] = threading.Lock()
            self._last_seen[session.id] = time.monotonic()
        return session

    def get(self, session_id: str) -> tuple[Session, threading.Lock]:
        with self._lock:
            self._evict_idle()
            session = self._sessions.get(session_id)
            if session is None:
                raise UnknownSessionError(f"unknown session {session_id!r}")
            self._last_seen[session_id] = time.monotonic()
            return session, self._locks[session_id]

    def _evict_idle(self):
        if not self._idle_timeout:
            return
        cutoff = time.monotonic() - self._idle_timeout
        for sid, seen in list(self._last_seen.items()):
            if seen < cutoff:
                self._sessions.pop(sid, None)
                self._locks.pop(sid, None)
                self._last_seen.pop(sid, None)


_STATUS_BY_CODE = {
    "unknown_type": 404,
    "unknown_node": 404,
    "unknown_edge_type": 404,
    "unknown_occurrence": 404,
    "unknown_column": 404,
    "unknown_row": 404,
    "unknown_session": 404,
    "unknown_relation": 404,
    "no_table": 409,
    "out_of_range": 400,
}


def schema_document(graph: InstanceGraph) -> dict:
    doc = graph.to_json_dict()
    return {"node_types": doc["node_types"], "edge_types": doc["edge_types"]}


def page_document(session: Session, page: int = 1, size: Optional[int] = None) -> dict:
    table = session.current_etable()
    size = size or session.presentation.page_size
    doc = etable_mod.etable_to_json_dict(table, page=page, page_size=size)
    doc["session"] = session.id
    doc["pattern"] = session.current_pattern().to_json_dict()
    doc["history"] = [
        {"step": i, "kind": rec.kind, "args": rec.args, "description": describe_record(rec)}
        for i, rec in enumerate(session.history, start=1)
    ]
    return doc


def create_app(graph: InstanceGraph, config: ServerConfig) -> FastAPI:
    app = FastAPI(title="relgraph", docs_url=None, redoc_url=None)
    store = SessionStore(graph, config.page_size, config.session_idle_timeout)
    app.state.store = store
    app.state.graph = graph

    @app.exception_handler(RelGraphError)
    async def _relgraph_error(request: Request, exc: RelGraphError):
        status = _STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(status_code=status, content={"error": exc.envelope()})

    @app.get("/schema")
    def get_schema():
        return schema_document(graph)

    @app.post("/sessions", status_code=201)
    def create_session():
        session = store.create()
        return {"session": session.id}

    @app.post("/sessions/{session_id}/actions")
    def post_action(session_id: str, envelope: dict):
        session, lock = store.get(session_id)
        with lock:
            apply_action(session, envelope)
            return page_document(session)

    @app.get("/sessions/{session_id}/table")
    def get_table(session_id: str, page: int = 1, size: Optional[int] = None):
        session, lock = store.get(session_id)
        with lock:
            return page_document(session, page=page, size=size)

    @app.get("/sessions/{session_id}/history")
    def get_history(session_id: str):
        session, lock = store.get(session_id)
        with lock:
            return {
                "history": [
                    {
                        "step": i,
                        "kind": rec.kind,
                        "args": rec.args,
                        "description": describe_record(rec),
                    }
                    for i, rec in enumerate(session.history, start=1)
                ]
            }

    @app.post("/sessions/{session_id}/revert")
    def post_revert(session_id: str, body: dict):
        session, lock = store.get(session_id)
        with lock:
            apply_action(session, {"kind": "Revert", "args": {"step": body.get("step")}})
            return page_document(session)

    @app.get("/sessions/{session_id}/sql")
    def get_sql(session_id: str):
        session, lock = store.get(session_id)
        with lock:
            return {"sql": emit_sql(session.current_pattern(), graph.schema)}

    @app.get("/sessions/{session_id}/refs")
    def get_refs(session_id: str, row: str, column: str, page: int = 1,
                 size: int = DEFAULT_PAGE_SIZE):
        session, lock = store.get(session_id)
        with lock:
            table = session.current_etable()
            cell = table.row(row).cells.get(column)
            if cell is None or not isinstance(cell, tuple):
                raise UnknownColumnError(f"column {column!r} holds no entity references")
            if page < 1 or size < 1:
                raise OutOfRangeError("page and size must be >= 1")
            start = (page - 1) * size
            return {
                "refs": [r.to_json_dict() for r in cell[start : start + size]],
                "count": len(cell),
                "page": page,
                "page_size": size,
            }

    if config.static_dir:
        static_dir = Path(config.static_dir)
        if static_dir.is_dir():
            app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app


def serve(config: ServerConfig):
    """Load, validate, and serve the TGDB file; raises on a dirty graph."""
    import uvicorn

    graph = InstanceGraph.load(config.tgdb_path)
    report = graph.validate()
    if report:
        raise RelGraphError(
            "TGDB file failed validation",
            detail=[f"{v.rule} ({v.subject}): {v.message}" for v in report],
        )
    app = create_app(graph, config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
