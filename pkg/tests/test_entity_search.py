import random

import pytest

from flexcloud.entity_search import (
    EmptyQuery,
    EntitySpec,
    FieldSpec,
    PartSpec,
    QueryError,
    SpecError,
    build_index,
    parse_query,
    search,
    spec_from_json,
    term_display,
)
from flexcloud.relstore import Relation, Schema, Store
from flexcloud.service import render, search_payload

import brute_search
import randgen


def hits_as_tuples(result):
    return [(h.entity_id, h.score, h.fields) for h in result.hits]


class TestSpec:
    def test_from_json_round_trip(self, course_spec):
        assert course_spec.root == "Courses"
        assert course_spec.root_fields == (FieldSpec("Title", 3.0), FieldSpec("Description", 2.0))
        assert course_spec.parts == (
            PartSpec("Comments", "CourseID", "CourseID", (FieldSpec("Text", 1.0),)),
        )

    def test_unknown_column_rejected(self, fixture_store):
        spec = EntitySpec("course", "Courses", (FieldSpec("Titel", 1.0),), ())
        with pytest.raises(SpecError, match="Titel"):
            build_index(fixture_store, spec)

    def test_unknown_relation_rejected(self, fixture_store):
        spec = EntitySpec("course", "Kourses", (), ())
        with pytest.raises(SpecError, match="Kourses"):
            build_index(fixture_store, spec)

    def test_non_positive_weight_rejected(self, fixture_store):
        spec = EntitySpec("course", "Courses", (FieldSpec("Title", 0.0),), ())
        with pytest.raises(SpecError, match="positive"):
            build_index(fixture_store, spec)

    def test_malformed_spec_json(self):
        with pytest.raises(SpecError):
            spec_from_json('{"root": "Courses"}')


class TestBuildIndex:
    def test_empty_root(self, fixture_store, course_spec):
        schema = fixture_store.schema
        empty = Store(schema, {
            name: Relation(schema.relation(name), []) for name in fixture_store.relations
        })
        index = build_index(empty, course_spec)
        assert index.entity_count == 0

    def test_fixture_entities(self, course_index):
        assert course_index.entity_count == 12

    def test_programming_postings_match_scan(self, fixture_store, course_spec, course_index):
        entities = brute_search.scan_entity_fields(fixture_store, course_spec)
        expected = {
            entity_id
            for entity_id, fields in entities
            if any(brute_search.count_term(("programming",), tokens) for _l, _w, tokens in fields)
        }
        assert expected == {1, 2, 3}
        got = {course_index.entities[o].id for o in course_index.postings(("programming",))}
        assert got == expected


class TestSearch:
    def test_american_matches_scan(self, fixture_store, course_spec, course_index):
        query = [("american",)]
        result = search(course_index, query)
        expected_hits, expected_total = brute_search.scan_search(fixture_store, course_spec, query)
        assert hits_as_tuples(result) == expected_hits
        assert result.total == expected_total
        assert {h.entity_id for h in result.hits} == {4, 5, 6, 7, 12}

    def test_absent_term(self, course_index):
        result = search(course_index, [("zebra",)])
        assert result.total == 0 and result.hits == ()

    def test_empty_query(self, course_index):
        with pytest.raises(EmptyQuery):
            search(course_index, [])

    def test_limit_truncates_hits_not_total(self, course_index):
        full = search(course_index, [("american",)])
        limited = search(course_index, [("american",)], limit=2)
        assert limited.total == full.total == 5
        assert limited.hits == full.hits[:2]

    def test_title_hit_outranks_comment_hit(self):
        # Two courses identical except where the word sits: title (weight 3)
        # must beat a comment (weight 1) at equal term frequency.
        schema = randgen.canonical_schema()
        courses = [
            (1, "CS", "Other topic", "desc", 3, None),
            (2, "CS", "Java workshop", "desc", 3, None),
        ]
        comments = [(1, 101, 1, 2008, "Fall", "great java workshop", 4.0, "2008-01-01")]
        store = Store(schema, {
            "Courses": Relation(schema.relation("Courses"), courses),
            "Students": Relation(schema.relation("Students"), []),
            "Comments": Relation(schema.relation("Comments"), comments),
        })
        spec = EntitySpec(
            "course", "Courses",
            (FieldSpec("Title", 3.0), FieldSpec("Description", 2.0)),
            (PartSpec("Comments", "CourseID", "CourseID", (FieldSpec("Text", 1.0),)),),
        )
        result = search(build_index(store, spec), [("java",)])
        assert [h.entity_id for h in result.hits] == [2, 1]
        assert result.hits[0].score == 3.0  # tf 1 in Title
        assert result.hits[1].score == 1.0  # tf 1 in a comment

    def test_bigram_requires_adjacency(self, course_index):
        # "american politics" is adjacent only in the Latin American Politics course.
        result = search(course_index, [("american", "politics")])
        assert [h.entity_id for h in result.hits] == [5]

    def test_deterministic_serialization(self, course_index):
        a = render(search_payload(search(course_index, [("american",)])))
        b = render(search_payload(search(course_index, [("american",)])))
        assert a == b


class TestParseQuery:
    def test_words_and_phrase(self):
        assert parse_query('american "latin american"') == [("american",), ("latin", "american")]

    def test_dedupe_preserves_order(self):
        assert parse_query("java java beans") == [("java",), ("beans",)]

    def test_three_token_phrase_rejected(self):
        with pytest.raises(QueryError, match="two tokens"):
            parse_query('"one two three"')

    def test_unterminated_quote(self):
        with pytest.raises(QueryError, match="unterminated"):
            parse_query('java "latin american')

    def test_empty_phrase_ignored(self):
        assert parse_query('java ""') == [("java",)]

    def test_display(self):
        assert term_display(("latin", "american")) == "latin american"


COURSE_SPEC = EntitySpec(
    "course", "Courses",
    (FieldSpec("Title", 3.0), FieldSpec("Description", 2.0)),
    (PartSpec("Comments", "CourseID", "CourseID", (FieldSpec("Text", 1.0),)),),
)


def test_index_equals_scan_on_random_stores():
    rng = random.Random(731)
    for _ in range(6):
        store = randgen.random_store(rng, max_courses=40, max_comments=120)
        index = build_index(store, COURSE_SPEC)
        for query in randgen.random_queries(rng, 25):
            result = search(index, query)
            hits, total = brute_search.scan_search(store, COURSE_SPEC, query)
            assert hits_as_tuples(result) == hits
            assert result.total == total


def test_monotone_refinement_on_random_stores():
    rng = random.Random(9182)
    for _ in range(6):
        store = randgen.random_store(rng, max_courses=40, max_comments=120)
        index = build_index(store, COURSE_SPEC)
        for query in randgen.random_queries(rng, 10):
            result = search(index, query)
            if not result.hits:
                continue
            ids = {h.entity_id for h in result.hits}
            # Pick a term present in the results and refine with it.
            entity = index.entities[index.entity_ord(result.hits[0].entity_id)]
            for field in entity.fields:
                if field.tokens:
                    term = (field.tokens[0],)
                    break
            else:
                continue
            refined = search(index, list(result.query) + [term])
            refined_ids = {h.entity_id for h in refined.hits}
            assert refined_ids <= ids
            assert refined_ids


def test_field_weight_dominance(fixture_store):
    low = EntitySpec("course", "Courses", (FieldSpec("Title", 1.0),), ())
    high = EntitySpec("course", "Courses", (FieldSpec("Title", 5.0),), ())
    q = [("programming",)]
    score_low = {h.entity_id: h.score for h in search(build_index(fixture_store, low), q).hits}
    score_high = {h.entity_id: h.score for h in search(build_index(fixture_store, high), q).hits}
    assert set(score_low) == set(score_high)
    for entity_id in score_low:
        assert score_high[entity_id] > score_low[entity_id]
