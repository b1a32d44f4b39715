"""Command-line entry points: translate, serve, script, sql."""

from __future__ import annotations

import dataclasses
import json
import os
import sys

import click

from . import etable as etable_mod
from .actions import Session, apply_action
from .errors import RelGraphError
from .model import InstanceGraph
from .server import ServerConfig, serve as run_server
from .sqlbridge import emit_sql, load_pattern
from .translate import RelationManifest, translate as run_translate


@click.group()
def main():
    """Explore relational databases as typed graphs with enriched tables."""


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--strict", is_flag=True, help="Fail on dangling references or bad cells.")
@click.option("--report", "report_path", type=click.Path(), default=None)
def translate(manifest_path, data_dir, out_path, strict, report_path):
    """Translate a relational dump (manifest + CSV directory) into a TGDB file."""
    try:
        manifest = RelationManifest.load(manifest_path)
        result = run_translate(data_dir, manifest, strict=strict)
    except RelGraphError as exc:
        raise click.ClickException(f"{exc.code}: {exc.message}")
    violations = result.graph.validate()
    if violations:
        raise click.ClickException(
            "translated graph failed validation: "
            + "; ".join(f"{v.rule} ({v.subject})" for v in violations)
        )
    result.graph.save(out_path)
    if report_path:
        report = {
            "issues": [dataclasses.asdict(i) for i in result.issues],
            "categorical_candidates": result.categorical_advisory,
        }
        with open(report_path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
    click.echo(
        f"wrote {out_path}: {len(result.graph.nodes)} nodes, "
        f"{len(result.graph.edges)} edges, {len(result.issues)} issue(s)"
    )


@main.command()
@click.option("--tgdb", "tgdb_path", required=True, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=None, type=int, help="Overrides RELGRAPH_PORT (default 8000).")
@click.option("--page-size", default=None, type=int, help="Overrides RELGRAPH_PAGE_SIZE (default 50).")
@click.option("--static-dir", default=None, type=click.Path(file_okay=False))
@click.option("--idle-timeout", default=0.0, type=float, show_default=True,
              help="Session idle eviction in seconds; 0 keeps sessions forever.")
def serve(tgdb_path, host, port, page_size, static_dir, idle_timeout):
    """Serve the HTTP API (and optionally the UI bundle) for a TGDB file."""
    if port is None:
        port = int(os.environ.get("RELGRAPH_PORT", "8000"))
    if page_size is None:
        page_size = int(os.environ.get("RELGRAPH_PAGE_SIZE", "50"))
    config = ServerConfig(
        tgdb_path=tgdb_path,
        host=host,
        port=port,
        page_size=page_size,
        session_idle_timeout=idle_timeout,
        static_dir=static_dir,
    )
    try:
        run_server(config)
    except RelGraphError as exc:
        raise click.ClickException(f"{exc.code}: {exc.message} {exc.detail or ''}")


@main.command()
@click.option("--tgdb", "tgdb_path", required=True, type=click.Path(exists=True))
@click.option("--script", "script_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
def script(tgdb_path, script_path, fmt):
    """Replay a list of action envelopes headlessly and print the final table."""
    graph = InstanceGraph.load(tgdb_path)
    with open(script_path, encoding="utf-8") as fh:
        doc = json.load(fh)
    envelopes = doc["actions"] if isinstance(doc, dict) else doc
    if not envelopes or envelopes[0].get("kind") != "Open":
        raise click.ClickException("script must start with an Open action")
    session = Session(graph)
    for i, envelope in enumerate(envelopes, start=1):
        try:
            apply_action(session, envelope)
        except RelGraphError as exc:
            raise click.ClickException(f"step {i}: {exc.code}: {exc.message}")
    table = session.current_etable()
    if fmt == "csv":
        click.echo(etable_mod.etable_to_csv(table), nl=False)
    else:
        doc = etable_mod.etable_to_json_dict(
            table, page=1, page_size=max(1, table.total_row_count)
        )
        click.echo(json.dumps(doc, indent=2, default=str))


@main.command()
@click.option("--tgdb", "tgdb_path", required=True, type=click.Path(exists=True))
@click.option("--pattern", "pattern_path", required=True, type=click.Path(exists=True))
def sql(tgdb_path, pattern_path):
    """Print the general SQL statement for a serialized query pattern."""
    graph = InstanceGraph.load(tgdb_path)
    try:
        pattern = load_pattern(pattern_path, graph.schema)
        click.echo(emit_sql(pattern, graph.schema))
    except RelGraphError as exc:
        raise click.ClickException(f"{exc.code}: {exc.message}")


if __name__ == "__main__":
    sys.exit(main())
