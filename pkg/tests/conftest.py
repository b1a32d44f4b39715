import pytest
from pathlib import Path

# Filled by tests/test_acceptance.py; printed after the run so each criterion
# gets exactly one pass/fail line in the terminal summary.
ACCEPTANCE_RESULTS: list[tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(ACCEPTANCE_RESULTS):
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number} ({name}): {verdict} — {detail}")

from relgraph.model import (
    AttributeDef,
    Edge,
    EdgeType,
    InstanceGraph,
    Node,
    NodeType,
    SchemaGraph,
)
from relgraph.translate import RelationManifest, translate

FIXTURES = Path(__file__).parent / "fixtures"
ACADEMIC = FIXTURES / "academic"


@pytest.fixture(scope="session")
def academic_manifest() -> RelationManifest:
    return RelationManifest.load(ACADEMIC / "manifest.json")


@pytest.fixture(scope="session")
def academic(academic_manifest):
    """Full translation result for the 7-relation academic fixture."""
    return translate(ACADEMIC, academic_manifest)


@pytest.fixture(scope="session")
def graph(academic) -> InstanceGraph:
    return academic.graph


def build_mini_graph() -> InstanceGraph:
    """Small hand-built graph: 3 papers, 2 authors, authorship edges."""
    papers = NodeType(
        id="Papers",
        name="Papers",
        attributes=(
            AttributeDef("paper_id", "integer"),
            AttributeDef("title", "text"),
            AttributeDef("year", "integer"),
        ),
        label_attribute="title",
        origin="entity_table",
    )
    authors = NodeType(
        id="Authors",
        name="Authors",
        attributes=(AttributeDef("author_id", "integer"), AttributeDef("name", "text")),
        label_attribute="name",
        origin="entity_table",
    )
    wrote = EdgeType(
        id="Authors->Papers",
        name="Papers",
        source_type="Authors",
        target_type="Papers",
        origin="mn_relationship",
        reverse_of="Papers->Authors",
    )
    by = EdgeType(
        id="Papers->Authors",
        name="Authors",
        source_type="Papers",
        target_type="Authors",
        origin="mn_relationship",
        reverse_of="Authors->Papers",
    )
    schema = SchemaGraph([papers, authors], [wrote, by])
    nodes = [
        Node("Papers:1", "Papers", {"paper_id": 1, "title": "Graph queries", "year": 2003}),
        Node("Papers:2", "Papers", {"paper_id": 2, "title": "Usable joins", "year": 2006}),
        Node("Papers:3", "Papers", {"paper_id": 3, "title": "Entity tables", "year": 2010}),
        Node("Authors:1", "Authors", {"author_id": 1, "name": "Arnab Nandi"}),
        Node("Authors:2", "Authors", {"author_id": 2, "name": None}),
    ]
    pairs = [("Papers:1", "Authors:1"), ("Papers:1", "Authors:2"),
             ("Papers:2", "Authors:1"), ("Papers:3", "Authors:2")]
    edges = []
    for p, a in pairs:
        edges.append(Edge(f"Papers->Authors#{p}=>{a}", "Papers->Authors", p, a))
        edges.append(Edge(f"Authors->Papers#{a}=>{p}", "Authors->Papers", a, p))
    return InstanceGraph(schema, nodes, edges)


@pytest.fixture()
def mini() -> InstanceGraph:
    return build_mini_graph()
