"""Keyword search over entities that span multiple relations.

An entity is one root tuple plus the text of joined part rows (e.g. a
course together with every comment written about it). The index answers
conjunctive queries of unigrams and two-token phrases with field-weighted
term-frequency scoring:

    score(e) = sum over query terms t, over entity fields f, of
               weight(f) * tf(t, f)

Raw weighted tf is used deliberately: it keeps every score exactly
recomputable by a brute-force scan. Long comment threads therefore
inflate scores; choose part weights accordingly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from . import relstore
from .relstore import Schema, Store
from .textkit import tokenize

#: A query term: a 1-tuple (unigram) or 2-tuple (adjacent-token phrase).
QueryTerm = tuple


class SpecError(ValueError):
    """Entity spec references unknown relations/columns or bad weights."""


class QueryError(ValueError):
    """Query text cannot be turned into unigram/bigram terms."""


class EmptyQuery(QueryError):
    """Search was invoked with no query terms."""


@dataclass(frozen=True)
class FieldSpec:
    column: str
    weight: float


@dataclass(frozen=True)
class PartSpec:
    relation: str
    root_join: str
    part_join: str
    fields: tuple[FieldSpec, ...]


@dataclass(frozen=True)
class EntitySpec:
    """Declares a searchable entity: a root relation plus text-bearing parts."""

    name: str
    root: str
    root_fields: tuple[FieldSpec, ...]
    parts: tuple[PartSpec, ...]


@dataclass(frozen=True)
class EntityField:
    label: str
    relation: str
    weight: float
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class Entity:
    id: object
    fields: tuple[EntityField, ...]


@dataclass(frozen=True)
class Hit:
    entity_id: object
    score: float
    fields: tuple[str, ...]


@dataclass(frozen=True)
class SearchResult:
    query: tuple[QueryTerm, ...]
    hits: tuple[Hit, ...]
    total: int


def spec_from_json(document: str | dict) -> EntitySpec:
    """Build an EntitySpec from its JSON form (see README for the format)."""
    raw = json.loads(document) if isinstance(document, str) else document
    try:
        fields = tuple(FieldSpec(c, float(w)) for c, w in raw.get("root_fields", []))
        parts = tuple(
            PartSpec(
                p["relation"],
                p["join"][0],
                p["join"][1],
                tuple(FieldSpec(c, float(w)) for c, w in p.get("fields", [])),
            )
            for p in raw.get("parts", [])
        )
        return EntitySpec(raw["name"], raw["root"], fields, parts)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise SpecError(f"malformed entity spec: {exc}") from None


def load_specs(document: str) -> dict[str, EntitySpec]:
    """Load a JSON list of entity specs, keyed by entity name."""
    raw = json.loads(document)
    if not isinstance(raw, list):
        raise SpecError("entity spec file must hold a JSON list")
    specs = {}
    for entry in raw:
        spec = spec_from_json(entry)
        if spec.name in specs:
            raise SpecError(f"duplicate entity name {spec.name!r}")
        specs[spec.name] = spec
    return specs


def _validate_spec(schema: Schema, spec: EntitySpec) -> None:
    if not schema.has_relation(spec.root):
        raise SpecError(f"entity {spec.name!r}: unknown root relation {spec.root!r}")
    root_def = schema.relation(spec.root)

    def check_fields(defn, fields, where):
        for f in fields:
            if not defn.has_column(f.column):
                raise SpecError(f"entity {spec.name!r}: {where}: unknown column {f.column!r}")
            if not (f.weight > 0):
                raise SpecError(
                    f"entity {spec.name!r}: {where}: field {f.column!r} weight must be positive"
                )

    check_fields(root_def, spec.root_fields, f"root {spec.root!r}")
    for part in spec.parts:
        if not schema.has_relation(part.relation):
            raise SpecError(f"entity {spec.name!r}: unknown part relation {part.relation!r}")
        part_def = schema.relation(part.relation)
        if not root_def.has_column(part.root_join):
            raise SpecError(f"entity {spec.name!r}: unknown root join column {part.root_join!r}")
        if not part_def.has_column(part.part_join):
            raise SpecError(
                f"entity {spec.name!r}: part {part.relation!r}: unknown join column {part.part_join!r}"
            )
        check_fields(part_def, part.fields, f"part {part.relation!r}")


def value_text(value) -> str:
    """Canonical text of a stored value for tokenization; null reads as empty."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return repr(value) if isinstance(value, float) else str(value)


class SearchIndex:
    """Immutable inverted index over one entity spec.

    Posting lists map each term (unigram or adjacent bigram, as a tuple)
    to per-entity, per-field term frequencies. Bigrams never span two
    source rows: every joined part row becomes its own field entry.
    """

    def __init__(self, spec: EntitySpec, entities: tuple[Entity, ...]):
        self.spec = spec
        self.entities = entities
        self._ord_by_id = {e.id: i for i, e in enumerate(entities)}
        # term -> entity ordinal -> list of (field index, tf)
        self._postings: dict[QueryTerm, dict[int, list[tuple[int, int]]]] = {}
        for ord_, entity in enumerate(entities):
            for field_idx, field in enumerate(entity.fields):
                counts: dict[QueryTerm, int] = {}
                for token in field.tokens:
                    key = (token,)
                    counts[key] = counts.get(key, 0) + 1
                for pair in zip(field.tokens, field.tokens[1:]):
                    counts[pair] = counts.get(pair, 0) + 1
                for key, tf in counts.items():
                    self._postings.setdefault(key, {}).setdefault(ord_, []).append((field_idx, tf))

    @property
    def entity_count(self) -> int:
        return len(self.entities)

    def entity_ord(self, entity_id) -> int:
        return self._ord_by_id[entity_id]

    def postings(self, term: QueryTerm) -> dict[int, list[tuple[int, int]]]:
        return self._postings.get(tuple(term), {})

    def doc_freq(self, term: QueryTerm) -> int:
        """Number of entities in the whole index containing the term."""
        return len(self._postings.get(tuple(term), {}))


def build_index(store: Store, spec: EntitySpec) -> SearchIndex:
    """Materialize every entity for the spec and index its term positions."""
    _validate_spec(store.schema, spec)
    root = store.relations[spec.root]
    root_def = root.defn
    pk_idx = root_def.column_index(root_def.primary_key)

    # Pre-group part rows by join value so materialization is one pass.
    grouped: list[dict[object, list[tuple]]] = []
    for part in spec.parts:
        rel = store.relations[part.relation]
        join_idx = rel.defn.column_index(part.part_join)
        groups: dict[object, list[tuple]] = {}
        for row in rel.rows:
            key = row[join_idx]
            if key is None:
                continue
            groups.setdefault(key, []).append(row)
        grouped.append(groups)

    entities = []
    for row in root.rows:
        fields: list[EntityField] = []
        for f in spec.root_fields:
            tokens = tuple(tokenize(value_text(row[root_def.column_index(f.column)])))
            if tokens:
                fields.append(EntityField(f.column, spec.root, f.weight, tokens))
        for part, groups in zip(spec.parts, grouped):
            rel_def = store.relations[part.relation].defn
            join_value = row[root_def.column_index(part.root_join)]
            if join_value is None:
                continue
            for part_row in groups.get(join_value, []):
                for f in part.fields:
                    tokens = tuple(tokenize(value_text(part_row[rel_def.column_index(f.column)])))
                    if tokens:
                        fields.append(
                            EntityField(f"{part.relation}.{f.column}", part.relation, f.weight, tokens)
                        )
        entities.append(Entity(row[pk_idx], tuple(fields)))
    return SearchIndex(spec, tuple(entities))


def _check_term(term) -> QueryTerm:
    term = tuple(term)
    if not 1 <= len(term) <= 2:
        raise QueryError(f"query terms are unigrams or two-token phrases, got {term!r}")
    for token in term:
        if tokenize(token) != [token]:
            raise QueryError(f"query term component {token!r} is not a single normalized token")
    return term


def search(index: SearchIndex, query: list, limit: int | None = None) -> SearchResult:
    """Conjunctive search: an entity matches iff every term occurs in it.

    Hits are ordered by score descending, entity id ascending; ``limit``
    truncates the hit list but not the reported total.
    """
    if not query:
        raise EmptyQuery("query must contain at least one term")
    terms = tuple(_check_term(t) for t in query)

    matched: set[int] | None = None
    for term in terms:
        ords = set(index.postings(term).keys())
        matched = ords if matched is None else matched & ords
        if not matched:
            return SearchResult(terms, (), 0)

    hits = []
    for ord_ in matched:
        entity = index.entities[ord_]
        contributions = []
        matched_fields: set[int] = set()
        for term in terms:
            for field_idx, tf in index.postings(term)[ord_]:
                contributions.append(entity.fields[field_idx].weight * tf)
                matched_fields.add(field_idx)
        labels: list[str] = []
        for field_idx in sorted(matched_fields):
            label = entity.fields[field_idx].label
            if label not in labels:
                labels.append(label)
        hits.append(Hit(entity.id, math.fsum(contributions), tuple(labels)))

    hits.sort(key=lambda h: (-h.score, h.entity_id))
    total = len(hits)
    if limit is not None:
        hits = hits[: max(limit, 0)]
    return SearchResult(terms, tuple(hits), total)


def parse_query(text: str) -> list[QueryTerm]:
    """Parse user query text: bare words are unigrams, "quoted spans" phrases.

    Phrases longer than two tokens are rejected; duplicate terms collapse,
    keeping first occurrence order.
    """
    parts = text.split('"')
    if len(parts) % 2 == 0:
        raise QueryError("unterminated phrase quote")
    terms: list[QueryTerm] = []
    for i, part in enumerate(parts):
        tokens = tokenize(part)
        if i % 2 == 1:  # inside quotes
            if len(tokens) > 2:
                raise QueryError(f"phrase {part.strip()!r} has more than two tokens")
            if tokens:
                terms.append(tuple(tokens))
        else:
            terms.extend((t,) for t in tokens)
    out: list[QueryTerm] = []
    for term in terms:
        if term not in out:
            out.append(term)
    return out


def term_display(term: QueryTerm) -> str:
    return " ".join(term)
