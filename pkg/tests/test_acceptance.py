"""Acceptance gate: one test per criterion, each reporting a pass/fail line.

Expected values marked inline: frozen constants were derived from the
independent brute-force oracles in oracles.py and are re-checked against them
at run time, so a regression shows up both as an assertion and as an oracle
mismatch.
"""

import itertools
import random
import time

import pytest

from relgraph import etable as etable_mod
from relgraph.actions import Presentation, Session, apply_action
from relgraph.algebra import match
from relgraph.errors import RelGraphError
from relgraph.etable import materialize
from relgraph.pattern import (
    TOP,
    Condition,
    PatternEdge,
    PatternOccurrence,
    Predicate,
    PredicateTarget,
    QueryPattern,
    record,
    replay,
)
from relgraph.sqlbridge import pattern_from_join_query
from relgraph.translate import (
    RELATIONSHIP_MN,
    RelationManifest,
    classify_relations,
    read_tables,
    translate,
)

from conftest import ACADEMIC, ACCEPTANCE_RESULTS
from oracles import (
    brute_force_match,
    eval_join_query,
    random_graph,
    random_join_query,
    random_pattern,
)


def report(number, name, detail):
    ACCEPTANCE_RESULTS.append((number, name, True, detail))


@pytest.fixture(autouse=True)
def _mark_failure(request):
    entry_count = len(ACCEPTANCE_RESULTS)
    yield
    if len(ACCEPTANCE_RESULTS) == entry_count:
        marker = request.node.get_closest_marker("criterion")
        if marker:
            ACCEPTANCE_RESULTS.append((*marker.args, False, "assertion failed"))


def attr_pred(name, op, value):
    return {"target": {"kind": "attribute", "name": name}, "op": op, "value": value}


def nlabel_pred(edge_type, op, value):
    return {"target": {"kind": "neighbor_label", "edge_type": edge_type}, "op": op, "value": value}


@pytest.mark.criterion(1, "translation fidelity")
def test_criterion_1_translation_fidelity():
    start = time.monotonic()
    manifest = RelationManifest.load(ACADEMIC / "manifest.json")
    result = translate(ACADEMIC, manifest)
    elapsed = time.monotonic() - start
    schema = result.graph.schema

    entity = [nt for nt in schema.node_types.values() if nt.origin == "entity_table"]
    multivalued = [
        nt for nt in schema.node_types.values() if nt.origin == "multivalued_attribute"
    ]
    assert len(entity) == 4
    assert len(multivalued) == 1 and multivalued[0].id == "Keywords"

    loop = schema.edge_type("Papers->Papers")
    loop_rev = schema.edge_type("Papers->Papers (2)")
    assert loop.is_self_loop and loop_rev.is_self_loop
    assert loop.reverse_of == loop_rev.id and loop_rev.reverse_of == loop.id

    for et in schema.edge_types.values():
        rev = schema.edge_type(et.reverse_of)
        assert rev.reverse_of == et.id
        assert (rev.source_type, rev.target_type) == (et.target_type, et.source_type)

    assert result.graph.validate() == []
    assert result.issues == []
    assert elapsed < 1.0
    report(1, "translation fidelity",
           f"4 entity + 1 multivalued node types, 10 paired edge types, {elapsed:.3f}s")


def _random_cases(count):
    for seed in range(count):
        rng = random.Random(seed)
        graph = random_graph(rng)
        yield seed, rng, graph, random_pattern(rng, graph.schema)


@pytest.mark.criterion(2, "oracle equivalence of matching")
def test_criterion_2_match_oracle_equivalence():
    start = time.monotonic()
    cases = 0
    for seed, _, graph, pattern in _random_cases(220):
        assert match(pattern, graph).tuples == brute_force_match(pattern, graph), f"seed {seed}"
        cases += 1
    elapsed = time.monotonic() - start
    assert cases >= 200
    assert elapsed < 60.0
    report(2, "oracle equivalence of matching", f"{cases} randomized cases in {elapsed:.1f}s")


def _random_order(rng, pattern):
    """A random evaluation order that keeps every prefix connected."""
    adjacency = {o.id: set() for o in pattern.occurrences}
    for e in pattern.edges:
        adjacency[e.from_occurrence].add(e.to_occurrence)
        adjacency[e.to_occurrence].add(e.from_occurrence)
    order = [rng.choice(list(adjacency))]
    frontier = set(adjacency[order[0]])
    while frontier:
        nxt = rng.choice(sorted(frontier))
        order.append(nxt)
        frontier |= adjacency[nxt]
        frontier -= set(order)
    return order


@pytest.mark.criterion(3, "join-order independence")
def test_criterion_3_join_order_independence():
    checked = 0
    for seed, rng, graph, pattern in _random_cases(220):
        reference = match(pattern, graph).tuples
        for _ in range(5):
            order = _random_order(rng, pattern)
            got = match(pattern, graph, order)
            assert got.tuples == reference, f"seed {seed} order {order}"
            assert got.attributes == tuple(o.id for o in pattern.occurrences)
            checked += 1
    report(3, "join-order independence", f"{checked} random orders across 220 patterns")


def _fig7_pattern():
    korea = Condition((Predicate(PredicateTarget.attribute("country"), "contains", "Korea"),))
    after_2005 = Condition((Predicate(PredicateTarget.attribute("year"), ">", 2005),))
    sigmod = Condition((Predicate(PredicateTarget.attribute("name"), "=", "SIGMOD"),))
    return QueryPattern(
        occurrences=(
            PatternOccurrence("o1", "Institutions", korea, alias="Institutions"),
            PatternOccurrence("o2", "Authors", TOP, alias="Authors"),
            PatternOccurrence("o3", "Papers", after_2005, alias="Papers"),
            PatternOccurrence("o4", "Conferences", sigmod, alias="Conferences"),
        ),
        edges=(
            PatternEdge("Institutions->Authors", "o1", "o2"),
            PatternEdge("Authors->Papers", "o2", "o3"),
            PatternEdge("Papers->Conferences", "o3", "o4"),
        ),
        primary="o2",
    )


@pytest.mark.criterion(4, "8-operator replay")
def test_criterion_4_eight_operator_replay(graph):
    # Researchers with a post-2005 SIGMOD paper, currently at a Korean institution.
    start = time.monotonic()
    operators = [
        ("Initiate", {"node_type": "Institutions"}),
        ("Select", {"predicates": [attr_pred("country", "contains", "Korea")]}),
        ("Add", {"edge_type": "Institutions->Authors"}),
        ("Add", {"edge_type": "Authors->Papers"}),
        ("Select", {"predicates": [attr_pred("year", ">", 2005)]}),
        ("Add", {"edge_type": "Papers->Conferences"}),
        ("Select", {"predicates": [attr_pred("name", "=", "SIGMOD")]}),
        ("Shift", {"occurrence": "o2"}),
    ]
    assert len(operators) == 8
    records = []
    pattern = None
    for kind, args in operators:
        rec = record(graph.schema, pattern, kind, args)
        records.append(rec)
        pattern = rec.pattern
    direct = _fig7_pattern()
    assert pattern == direct
    assert replay(graph.schema, records) == direct

    table = materialize(pattern, graph)
    oracle = brute_force_match(pattern, graph)
    primary_idx = 1  # o2 is the second occurrence
    oracle_keys = sorted({t[primary_idx] for t in oracle})
    assert [r.key for r in table.rows] == oracle_keys == ["Authors:11", "Authors:4"]  # [DERIVED]
    assert len(oracle) == 3  # [DERIVED] three matched tuples collapse to two rows
    elapsed = time.monotonic() - start
    assert elapsed < 1.0
    report(4, "8-operator replay",
           f"replayed pattern equals direct build; rows {oracle_keys}, {elapsed:.3f}s")


@pytest.mark.criterion(5, "format-transformation consistency")
def test_criterion_5_format_transformation_consistency():
    cases = 0
    for seed, _, graph, pattern in _random_cases(220):
        relation = match(pattern, graph)
        table = materialize(pattern, graph)
        primary_idx = relation.index_of(pattern.primary)
        per_key = {}
        for t in relation.tuples:
            per_key.setdefault(t[primary_idx], []).append(t)
        assert [r.key for r in table.rows] == sorted(per_key), f"seed {seed}"
        for row in table.rows:
            for col in table.columns:
                cell = row.cells[col.id]
                if col.kind == "participating":
                    idx = relation.index_of(col.occurrence)
                    want = sorted({t[idx] for t in per_key[row.key]})
                    assert [ref.node for ref in cell] == want, f"seed {seed}"
                elif col.kind == "neighbor":
                    assert [ref.node for ref in cell] == graph.neighbor_ids(
                        row.key, col.edge_type
                    ), f"seed {seed}"
                else:
                    assert cell == graph.node(row.key).values.get(col.attribute)
        cases += 1
    report(5, "format-transformation consistency", f"{cases} randomized tables checked")


def _run_script(graph, envelopes):
    session = Session(graph)
    start = time.monotonic()
    table = None
    for envelope in envelopes:
        table = apply_action(session, envelope)
    elapsed = time.monotonic() - start
    assert elapsed < 1.0
    # Every scripted answer is re-verified against the brute-force enumerator.
    pattern = session.current_pattern()
    oracle = brute_force_match(pattern, graph)
    idx = [o.id for o in pattern.occurrences].index(pattern.primary)
    assert sorted({t[idx] for t in oracle}) == sorted(r.key for r in table.rows)
    return session, table


@pytest.mark.criterion(6, "task battery")
def test_criterion_6_task_battery(graph):
    open_papers = {"kind": "Open", "args": {"node_type": "Papers"}}

    # Task 1, attribute lookup: publication year of a known paper.
    _, t1 = _run_script(graph, [
        open_papers,
        {"kind": "Filter", "args": {"predicates": [
            attr_pred("title", "=", "Making database systems usable")]}},
    ])
    assert [r.key for r in t1.rows] == ["Papers:1"]
    assert t1.rows[0].cells["a:year"] == 2007  # [DERIVED]

    # Task 2, filter through a reference: papers citing that paper.
    _, t2 = _run_script(graph, [
        open_papers,
        {"kind": "Filter", "args": {"predicates": [
            nlabel_pred("Papers->Papers", "=", "Making database systems usable")]}},
    ])
    assert [r.key for r in t2.rows] == ["Papers:3", "Papers:4", "Papers:8"]  # [DERIVED]

    # Task 3, conjunctive filter: recent papers by a named author.
    _, t3 = _run_script(graph, [
        open_papers,
        {"kind": "Filter", "args": {"predicates": [
            attr_pred("year", ">=", 2013),
            nlabel_pred("Papers->Authors", "=", "Samuel Madden")]}},
    ])
    assert [r.key for r in t3.rows] == ["Papers:4", "Papers:5", "Papers:8"]  # [DERIVED]

    # Task 4, two-hop filter with pivots: KDD papers by Carnegie Mellon authors.
    _, t4 = _run_script(graph, [
        open_papers,
        {"kind": "Filter", "args": {"predicates": [
            nlabel_pred("Papers->Conferences", "=", "KDD")]}},
        {"kind": "Pivot", "args": {"column": "n:Papers->Authors"}},
        {"kind": "Filter", "args": {"predicates": [
            nlabel_pred("Authors->Institutions", "=", "Carnegie Mellon University")]}},
        {"kind": "Pivot", "args": {"column": "p:o1"}},
    ])
    assert [r.key for r in t4.rows] == ["Papers:2", "Papers:6", "Papers:9"]  # [DERIVED]

    # Task 5, count: researchers at a named institution.
    _, t5 = _run_script(graph, [
        {"kind": "Open", "args": {"node_type": "Authors"}},
        {"kind": "Filter", "args": {"predicates": [
            nlabel_pred("Authors->Institutions", "contains", "Korea Advanced")]}},
    ])
    assert t5.total_row_count == 2  # [DERIVED]
    assert [r.key for r in t5.rows] == ["Authors:10", "Authors:4"]

    # Task 6, aggregation by count: top 3 researchers by SIGMOD paper count,
    # via pivot plus a descending count sort.
    session, _ = _run_script(graph, [
        open_papers,
        {"kind": "Filter", "args": {"predicates": [
            nlabel_pred("Papers->Conferences", "=", "SIGMOD")]}},
        {"kind": "Pivot", "args": {"column": "n:Papers->Authors"}},
    ])
    t6 = apply_action(session, {"kind": "Sort", "args": {"column": "p:o1", "direction": "desc"}})
    top3 = [(r.key, len(r.cells["p:o1"])) for r in t6.rows[:3]]
    assert top3 == [("Authors:1", 3), ("Authors:2", 3), ("Authors:3", 3)]  # [DERIVED]
    assert len(t6.rows[3].cells["p:o1"]) == 2  # tie-free: fourth place is strictly lower

    report(6, "task battery", "six scripted tasks, each oracle-verified and < 1s")


@pytest.mark.criterion(7, "join-query soundness")
def test_criterion_7_join_query_soundness(academic, academic_manifest):
    start = time.monotonic()
    tables = read_tables(ACADEMIC, academic_manifest)
    category = {c.relation: c.category for c in classify_relations(academic_manifest)}
    cases = 0
    for seed in range(120):
        rng = random.Random(seed)
        spec = random_join_query(rng, academic_manifest, tables)
        pattern = pattern_from_join_query(spec, academic.translation)
        table = materialize(pattern, academic.graph)
        groups = eval_join_query(spec, academic_manifest, tables)

        occ_aliases = [a for r, a in spec.relations if category[r] != RELATIONSHIP_MN]
        occ_of = {alias: f"o{i + 1}" for i, alias in enumerate(occ_aliases)}
        primary_alias = spec.group_by or occ_aliases[0]

        assert {r.key for r in table.rows} == set(groups), f"seed {seed}"
        for row in table.rows:
            for alias in occ_aliases:
                if alias == primary_alias:
                    continue
                cell = row.cells[f"p:{occ_of[alias]}"]
                assert {ref.node for ref in cell} == groups[row.key][alias], f"seed {seed}"
        cases += 1
    elapsed = time.monotonic() - start
    assert cases >= 100
    assert elapsed < 60.0
    report(7, "join-query soundness", f"{cases} random join queries in {elapsed:.1f}s")


@pytest.mark.criterion(8, "duplication collapse")
def test_criterion_8_duplication_collapse(graph):
    pattern = QueryPattern(
        occurrences=(
            PatternOccurrence("o1", "Papers", alias="Papers"),
            PatternOccurrence("o2", "Authors", alias="Authors"),
        ),
        edges=(PatternEdge("Papers->Authors", "o1", "o2"),),
        primary="o1",
    )
    relation = match(pattern, graph)
    table = materialize(pattern, graph)
    has_multi_author_paper = any(len(r.cells["p:o2"]) >= 2 for r in table.rows)
    assert has_multi_author_paper
    assert len(relation.tuples) == 25  # [DERIVED] one tuple per authorship pair
    assert table.total_row_count == 10  # [DERIVED] one row per paper
    assert len(relation.tuples) > table.total_row_count
    report(8, "duplication collapse",
           f"{len(relation.tuples)} flat join tuples collapse to {table.total_row_count} rows")


# -- criterion 9: random valid sequences + invalid injections ------------


def _table_json(session):
    return etable_mod.etable_to_json_dict(
        session.current_etable(), page=1, page_size=max(1, len(session.graph.nodes))
    )


def _random_valid_action(rng, session):
    graph = session.graph
    node_types = sorted(graph.schema.node_types)
    if not session.history:
        if rng.random() < 0.7:
            return {"kind": "Open", "args": {"node_type": rng.choice(node_types)}}
        return {"kind": "Single", "args": {"node": rng.choice(sorted(graph.nodes))}}

    table = session.current_etable()
    pattern = session.current_pattern()
    choices = ["filter", "sort", "visibility", "revert", "open", "single"]
    ref_columns = [c for c in table.columns if c.kind != "base_attribute"]
    if ref_columns and len(pattern.occurrences) < 5:
        choices += ["pivot", "pivot"]
    elif [c for c in table.columns if c.kind == "participating"]:
        choices.append("pivot_participating")
    if table.rows and ref_columns:
        choices.append("seeall")
    kind = rng.choice(choices)

    if kind == "open":
        return {"kind": "Open", "args": {"node_type": rng.choice(node_types)}}
    if kind == "single":
        return {"kind": "Single", "args": {"node": rng.choice(sorted(graph.nodes))}}
    if kind == "filter":
        nt = graph.schema.node_type(pattern.primary_occurrence.node_type)
        attr = rng.choice(nt.attributes)
        values = [
            n.values.get(attr.name)
            for n in graph.nodes_of_type(nt.id)
            if n.values.get(attr.name) is not None
        ]
        if not values:
            return {"kind": "Sort", "args": {"column": rng.choice(table.columns).id}}
        value = rng.choice(values)
        ops = ["=", "!=", "<", "<=", ">", ">="]
        if attr.kind == "text":
            ops = ["=", "!=", "contains"]
        return {"kind": "Filter", "args": {"predicates": [
            attr_pred(attr.name, rng.choice(ops), value)]}}
    if kind == "pivot":
        return {"kind": "Pivot", "args": {"column": rng.choice(ref_columns).id}}
    if kind == "pivot_participating":
        cols = [c for c in table.columns if c.kind == "participating"]
        return {"kind": "Pivot", "args": {"column": rng.choice(cols).id}}
    if kind == "seeall":
        return {"kind": "Seeall", "args": {
            "row": rng.choice(table.rows).key,
            "column": rng.choice(ref_columns).id,
        }}
    if kind == "sort":
        return {"kind": "Sort", "args": {
            "column": rng.choice(table.columns).id,
            "direction": rng.choice(["asc", "desc"]),
        }}
    if kind == "visibility":
        return {"kind": "SetVisibility", "args": {
            "column": rng.choice(table.columns).id,
            "visible": rng.random() < 0.5,
        }}
    return {"kind": "Revert", "args": {"step": rng.randint(1, len(session.history))}}


_INVALID_ACTIONS = [
    {"kind": "Pivot", "args": {"column": "a:paper_id"}},
    {"kind": "Pivot", "args": {"column": "zz"}},
    {"kind": "Filter", "args": {"predicates": [attr_pred("no_such_attr", "=", 1)]}},
    {"kind": "Sort", "args": {"column": "zz"}},
    {"kind": "Seeall", "args": {"row": "ghost", "column": "zz"}},
    {"kind": "Single", "args": {"node": "ghost"}},
    {"kind": "Revert", "args": {"step": 999}},
    {"kind": "Nonsense", "args": {}},
]


def _recompute_from_scratch(session):
    """Independent of Session internals: replay + presentation fold."""
    pattern = replay(session.graph.schema, session.history)
    table = materialize(pattern, session.graph)
    for column_id in sorted(session.presentation.hidden):
        try:
            table = etable_mod.set_column_visibility(table, column_id, False)
        except RelGraphError:
            continue
    if session.presentation.sort is not None:
        table = etable_mod.sort_rows(table, *session.presentation.sort)
    return etable_mod.etable_to_json_dict(
        table, page=1, page_size=max(1, len(session.graph.nodes))
    )


@pytest.mark.criterion(9, "session purity and atomicity")
def test_criterion_9_session_purity_and_atomicity(graph):
    sequences = 1000
    invalid_checks = 0
    for seq in range(sequences):
        rng = random.Random(10_000 + seq)
        session = Session(graph)
        envelopes = []
        for _ in range(rng.randint(1, 12)):
            envelope = _random_valid_action(rng, session)
            apply_action(session, envelope)
            envelopes.append(envelope)

        served = _table_json(session)
        assert served == _recompute_from_scratch(session), f"sequence {seq}"

        # Replaying the same envelopes into a fresh session reproduces the table.
        twin = Session(graph)
        for envelope in envelopes:
            apply_action(twin, envelope)
        assert _table_json(twin) == served, f"sequence {seq}"

        if seq % 5 == 0:
            bad = _INVALID_ACTIONS[(seq // 5) % len(_INVALID_ACTIONS)]
            before_history = list(session.history)
            before_pres = session.presentation.copy()
            with pytest.raises(Exception):
                apply_action(session, bad)
            assert session.history == before_history, f"sequence {seq}"
            assert session.presentation.sort == before_pres.sort
            assert session.presentation.hidden == before_pres.hidden
            assert session.presentation.page_size == before_pres.page_size
            assert _table_json(session) == served, f"sequence {seq}"
            invalid_checks += 1

    report(9, "session purity and atomicity",
           f"{sequences} random sequences, {invalid_checks} invalid injections")


@pytest.mark.criterion(10, "end-to-end UI gestures")
def test_criterion_10_end_to_end_ui_gestures():
    """The web UI's gesture walkthrough runs against a live service process.

    Delegates to the frontend e2e suite, which translates the fixture, starts
    the HTTP service on a free port, and checks that rendered row keys match
    the API response at every step of the exploration.
    """
    import shutil
    import subprocess
    from pathlib import Path

    frontend = Path(__file__).resolve().parent.parent / "frontend"
    if not (frontend / "node_modules").is_dir():
        pytest.skip("frontend dependencies not installed (run npm install in frontend/)")
    npx = shutil.which("npx")
    assert npx, "node toolchain not available"

    start = time.monotonic()
    proc = subprocess.run(
        [npx, "vitest", "run", "tests/e2e.test.ts"],
        cwd=frontend,
        capture_output=True,
        text=True,
        timeout=180,
    )
    elapsed = time.monotonic() - start
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert "5 passed" in proc.stdout, proc.stdout
    report(10, "end-to-end UI gestures", f"5 gesture steps verified in {elapsed:.1f}s")
