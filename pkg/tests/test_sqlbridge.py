"""SQL emission and the join-query-to-pattern translation."""

import json

import pytest

from relgraph.errors import NoEdgeTypeError, PatternError, UnknownRelationError
from relgraph.pattern import (
    Condition,
    PatternEdge,
    PatternOccurrence,
    Predicate,
    PredicateTarget,
    QueryPattern,
)
from relgraph.sqlbridge import (
    JoinCondition,
    JoinQuerySpec,
    _literal,
    emit_sql,
    load_pattern,
    pattern_from_join_query,
)


def pred(name, op, value):
    return Predicate(PredicateTarget.attribute(name), op, value)


def fig7_pattern():
    return QueryPattern(
        occurrences=(
            PatternOccurrence(
                "o1", "Institutions",
                Condition((pred("country", "contains", "Korea"),)),
                alias="Institutions",
            ),
            PatternOccurrence("o2", "Authors", alias="Authors"),
            PatternOccurrence(
                "o3", "Papers", Condition((pred("year", ">", 2005),)), alias="Papers"
            ),
            PatternOccurrence(
                "o4", "Conferences",
                Condition((pred("name", "=", "SIGMOD"),)),
                alias="Conferences",
            ),
        ),
        edges=(
            PatternEdge("Institutions->Authors", "o1", "o2"),
            PatternEdge("Authors->Papers", "o2", "o3"),
            PatternEdge("Papers->Conferences", "o3", "o4"),
        ),
        primary="o2",
    )


class TestEmitSql:
    def test_single_occurrence(self, graph):
        pattern = QueryPattern(
            (PatternOccurrence("o1", "Papers", alias="Papers"),), (), "o1"
        )
        assert emit_sql(pattern, graph.schema) == (
            "SELECT Papers.*\nFROM Papers\nGROUP BY Papers;"
        )

    def test_full_pattern(self, graph):
        sql = emit_sql(fig7_pattern(), graph.schema)
        assert sql == (
            "SELECT Authors.*, ent-list(Institutions), ent-list(Papers), ent-list(Conferences)\n"
            "FROM Institutions, Authors, Papers, Conferences\n"
            "WHERE source(Institutions.Authors) = target(Institutions.Authors)\n"
            "  AND source(Authors.Papers) = target(Authors.Papers)\n"
            "  AND source(Papers.Conferences) = target(Papers.Conferences)\n"
            "  AND Institutions.country CONTAINS 'Korea'\n"
            "  AND Papers.year > 2005\n"
            "  AND Conferences.name = 'SIGMOD'\n"
            "GROUP BY Authors;"
        )

    def test_aliases_with_spaces_are_quoted(self, graph):
        pattern = QueryPattern(
            occurrences=(
                PatternOccurrence("o1", "Papers", alias="Papers"),
                PatternOccurrence("o2", "Papers", alias="Papers (2)"),
            ),
            edges=(PatternEdge("Papers->Papers", "o1", "o2"),),
            primary="o1",
        )
        sql = emit_sql(pattern, graph.schema)
        assert 'ent-list("Papers (2)")' in sql
        assert 'FROM Papers, "Papers (2)"' in sql

    def test_invalid_pattern_rejected(self, graph):
        with pytest.raises(PatternError):
            emit_sql(QueryPattern((), (), "o1"), graph.schema)

    def test_deterministic(self, graph):
        assert emit_sql(fig7_pattern(), graph.schema) == emit_sql(fig7_pattern(), graph.schema)


def test_literals():
    assert _literal(None) == "NULL"
    assert _literal(True) == "TRUE"
    assert _literal(3) == "3"
    assert _literal(2.5) == "2.5"
    assert _literal("O'Brien") == "'O''Brien'"
    import datetime

    assert _literal(datetime.date(2020, 1, 2)) == "DATE '2020-01-02'"


class TestPatternFromJoinQuery:
    def task4_spec(self):
        # KDD papers written by authors at Carnegie Mellon.
        return JoinQuerySpec(
            relations=[
                ("Papers", "p"),
                ("Conferences", "c"),
                ("Paper_authors", "pa"),
                ("Authors", "a"),
                ("Institutions", "i"),
            ],
            join_conditions=[
                JoinCondition("p", "conference_id", "c", "conference_id"),
                JoinCondition("pa", "paper_id", "p", "paper_id"),
                JoinCondition("pa", "author_id", "a", "author_id"),
                JoinCondition("a", "institution_id", "i", "institution_id"),
            ],
            selections=[
                ("c", pred("name", "=", "KDD")),
                ("i", pred("name", "=", "Carnegie Mellon University")),
            ],
            group_by="p",
        )

    def test_task4_mapping(self, academic):
        pattern = pattern_from_join_query(self.task4_spec(), academic.translation)
        # The relationship alias collapses into an edge: four occurrences.
        assert [(o.id, o.node_type) for o in pattern.occurrences] == [
            ("o1", "Papers"), ("o2", "Conferences"), ("o3", "Authors"), ("o4", "Institutions"),
        ]
        assert set(pattern.edges) == {
            PatternEdge("Papers->Conferences", "o1", "o2"),
            PatternEdge("Papers->Authors", "o1", "o3"),
            PatternEdge("Authors->Institutions", "o3", "o4"),
        }
        assert pattern.primary == "o1"
        conds = {o.id: o.condition.predicates for o in pattern.occurrences}
        assert conds["o2"][0].value == "KDD"
        assert conds["o4"][0].value == "Carnegie Mellon University"

    def test_group_by_sets_primary(self, academic):
        spec = self.task4_spec()
        spec.group_by = "a"
        assert pattern_from_join_query(spec, academic.translation).primary == "o3"
        spec.group_by = None
        # Without GROUP BY, the first declared alias with an occurrence wins.
        assert pattern_from_join_query(spec, academic.translation).primary == "o1"

    def test_multivalued_alias_becomes_occurrence(self, academic):
        spec = JoinQuerySpec(
            relations=[("Papers", "p"), ("Paper_keywords", "k")],
            join_conditions=[JoinCondition("k", "paper_id", "p", "paper_id")],
            selections=[("k", pred("keyword", "=", "user"))],
            group_by="p",
        )
        pattern = pattern_from_join_query(spec, academic.translation)
        assert [(o.id, o.node_type) for o in pattern.occurrences] == [
            ("o1", "Papers"), ("o2", "Keywords"),
        ]
        assert pattern.edges == (PatternEdge("Papers->Keywords", "o1", "o2"),)

    def test_self_join_citation_direction(self, academic):
        # FK declaration order (paper_id, cited_paper_id) orients the edge.
        spec = JoinQuerySpec(
            relations=[("Papers", "citing"), ("Paper_citations", "pc"), ("Papers", "cited")],
            join_conditions=[
                JoinCondition("pc", "paper_id", "citing", "paper_id"),
                JoinCondition("pc", "cited_paper_id", "cited", "paper_id"),
            ],
            group_by="cited",
        )
        pattern = pattern_from_join_query(spec, academic.translation)
        assert pattern.edges == (PatternEdge("Papers->Papers", "o1", "o2"),)
        assert pattern.occurrence("o1").alias == "Papers"
        assert pattern.occurrence("o2").alias == "Papers (2)"
        assert pattern.primary == "o2"

    def test_fk_join_between_entities(self, academic):
        spec = JoinQuerySpec(
            relations=[("Authors", "a"), ("Institutions", "i")],
            join_conditions=[JoinCondition("a", "institution_id", "i", "institution_id")],
        )
        pattern = pattern_from_join_query(spec, academic.translation)
        assert pattern.edges == (PatternEdge("Authors->Institutions", "o1", "o2"),)

    def test_unknown_relation(self, academic):
        spec = JoinQuerySpec(relations=[("Nope", "n")], join_conditions=[])
        with pytest.raises(UnknownRelationError):
            pattern_from_join_query(spec, academic.translation)

    def test_relationship_alias_must_join_both_fks(self, academic):
        spec = JoinQuerySpec(
            relations=[("Papers", "p"), ("Paper_authors", "pa")],
            join_conditions=[JoinCondition("pa", "paper_id", "p", "paper_id")],
        )
        with pytest.raises(NoEdgeTypeError):
            pattern_from_join_query(spec, academic.translation)

    def test_selection_on_relationship_alias_rejected(self, academic):
        spec = JoinQuerySpec(
            relations=[("Papers", "p"), ("Paper_authors", "pa"), ("Authors", "a")],
            join_conditions=[
                JoinCondition("pa", "paper_id", "p", "paper_id"),
                JoinCondition("pa", "author_id", "a", "author_id"),
            ],
            selections=[("pa", pred("paper_id", "=", 1))],
        )
        with pytest.raises(PatternError):
            pattern_from_join_query(spec, academic.translation)

    def test_unjoinable_condition_rejected(self, academic):
        spec = JoinQuerySpec(
            relations=[("Papers", "p"), ("Institutions", "i")],
            join_conditions=[JoinCondition("p", "paper_id", "i", "institution_id")],
        )
        with pytest.raises(NoEdgeTypeError):
            pattern_from_join_query(spec, academic.translation)

    def test_json_round_trip(self):
        spec = self.task4_spec()
        doc = {
            "relations": [{"relation": r, "alias": a} for r, a in spec.relations],
            "join_conditions": [
                {
                    "left_alias": j.left_alias,
                    "left_attribute": j.left_attribute,
                    "right_alias": j.right_alias,
                    "right_attribute": j.right_attribute,
                }
                for j in spec.join_conditions
            ],
            "selections": [
                {"alias": a, "predicate": p.to_json_dict()} for a, p in spec.selections
            ],
            "group_by": "p",
        }
        again = JoinQuerySpec.from_json_dict(doc)
        assert again.relations == spec.relations
        assert again.join_conditions == spec.join_conditions
        assert again.group_by == "p"


def test_load_pattern(tmp_path, graph):
    path = tmp_path / "pattern.json"
    path.write_text(json.dumps(fig7_pattern().to_json_dict()))
    assert load_pattern(path, graph.schema) == fig7_pattern()
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(QueryPattern((), (), "o1").to_json_dict()))
    with pytest.raises(PatternError):
        load_pattern(bad, graph.schema)
