"""Immutable in-memory relational store: schema, CSV ingestion, snapshots.

A store is built once (from a schema document plus one CSV file per
relation), after which every downstream component treats it as read-only.
Values are plain Python objects: ``None`` (null), ``int``, ``float``,
``str``, and -- for derived attributes only -- ascending-key ``dict[int,
float]`` rating maps.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field

INT = "int"
FLOAT = "float"
TEXT = "text"
#: Derived column type for finite int->float maps; never appears in base schemas.
MAP = "map"

BASE_COLUMN_TYPES = (INT, FLOAT, TEXT)

SNAPSHOT_VERSION = 1
_SNAPSHOT_MARKER = "flexcloud_snapshot"

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_INT_CELL_RE = re.compile(r"[+-]?[0-9]+\Z")


class ParseError(ValueError):
    """Schema document is not valid JSON or not the expected shape."""


class SchemaError(ValueError):
    """Schema violates a structural rule (duplicate name, bad primary key)."""


class CsvError(ValueError):
    """CSV data does not fit the declared relation; carries a 1-based record number."""


class SnapshotError(ValueError):
    """Snapshot bytes are truncated, corrupted, or of an unknown version."""


@dataclass(frozen=True)
class ColumnDef:
    name: str
    type: str


@dataclass(frozen=True)
class RelationDef:
    """Shape of one relation. ``primary_key`` is None only on derived relations."""

    name: str
    columns: tuple[ColumnDef, ...]
    primary_key: str | None

    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def has_column(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)

    def column_index(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise KeyError(name)

    def column_type(self, name: str) -> str:
        return self.columns[self.column_index(name)].type


@dataclass(frozen=True)
class Schema:
    relations: tuple[RelationDef, ...]

    def relation_names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.relations)

    def has_relation(self, name: str) -> bool:
        return any(r.name == name for r in self.relations)

    def relation(self, name: str) -> RelationDef:
        for r in self.relations:
            if r.name == name:
                return r
        raise KeyError(name)


@dataclass
class Relation:
    """A relation definition plus its tuples, in ingestion order.

    ``annotations`` carries operator-provided side information (e.g. which
    candidates a ranking operator could not match); it never takes part in
    equality.
    """

    defn: RelationDef
    rows: list[tuple]
    annotations: dict = field(default_factory=dict, compare=False, repr=False)


@dataclass
class Store:
    schema: Schema
    relations: dict[str, Relation]


def _require_identifier(name: object, what: str) -> str:
    if not isinstance(name, str) or not _IDENT_RE.match(name):
        raise SchemaError(f"{what} {name!r} is not a valid identifier")
    return name


def load_schema(document: str) -> Schema:
    """Parse and validate a schema JSON document.

    Raises ParseError for malformed JSON and SchemaError for structural
    violations; both name the offending relation where one exists.
    """
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"schema document is not valid JSON: {exc}") from None
    if not isinstance(raw, dict) or not isinstance(raw.get("relations"), list):
        raise ParseError("schema document must be an object with a 'relations' list")

    relations: list[RelationDef] = []
    seen_relations: set[str] = set()
    for entry in raw["relations"]:
        if not isinstance(entry, dict):
            raise ParseError("each relation entry must be an object")
        name = _require_identifier(entry.get("name"), "relation name")
        if name in seen_relations:
            raise SchemaError(f"duplicate relation name {name!r}")
        seen_relations.add(name)

        columns: list[ColumnDef] = []
        seen_columns: set[str] = set()
        raw_columns = entry.get("columns")
        if not isinstance(raw_columns, list) or not raw_columns:
            raise SchemaError(f"relation {name!r} must declare a non-empty column list")
        for col in raw_columns:
            if not isinstance(col, dict):
                raise ParseError(f"relation {name!r}: each column must be an object")
            col_name = _require_identifier(col.get("name"), f"relation {name!r}: column name")
            if col_name in seen_columns:
                raise SchemaError(f"relation {name!r}: duplicate column name {col_name!r}")
            seen_columns.add(col_name)
            col_type = col.get("type")
            if col_type not in BASE_COLUMN_TYPES:
                raise SchemaError(f"relation {name!r}: column {col_name!r} has unknown type {col_type!r}")
            columns.append(ColumnDef(col_name, col_type))

        pk = entry.get("primary_key")
        if pk not in seen_columns:
            raise SchemaError(f"relation {name!r}: primary key {pk!r} is not a declared column")
        pk_type = next(c.type for c in columns if c.name == pk)
        if pk_type not in (INT, TEXT):
            raise SchemaError(f"relation {name!r}: primary key {pk!r} must be int or text, not {pk_type}")

        relations.append(RelationDef(name, tuple(columns), pk))
    return Schema(tuple(relations))


def _parse_cell(cell: str, col: ColumnDef, relation: str, record: int):
    if cell == "":
        return None
    if col.type == INT:
        if not _INT_CELL_RE.match(cell):
            raise CsvError(f"{relation}: record {record}: column {col.name!r}: {cell!r} is not an int")
        return int(cell)
    if col.type == FLOAT:
        try:
            value = float(cell)
        except ValueError:
            raise CsvError(f"{relation}: record {record}: column {col.name!r}: {cell!r} is not a float") from None
        if math.isnan(value) or math.isinf(value):
            raise CsvError(f"{relation}: record {record}: column {col.name!r}: {cell!r} is not finite")
        return value
    return cell


def ingest_csv(schema: Schema, relation_name: str, data: bytes | str) -> Relation:
    """Load one relation from RFC 4180 CSV with a header row.

    Header columns must be a permutation of the declared columns. Empty
    cells become null; row order is preserved. Record numbers in errors are
    1-based and count the header as record 1.
    """
    if not schema.has_relation(relation_name):
        raise CsvError(f"unknown relation {relation_name!r}")
    defn = schema.relation(relation_name)
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text, newline=""))

    try:
        header = next(reader)
    except StopIteration:
        raise CsvError(f"{relation_name}: record 1: missing header row") from None
    if sorted(header) != sorted(defn.column_names()):
        raise CsvError(
            f"{relation_name}: record 1: header {header!r} does not match declared columns "
            f"{list(defn.column_names())!r}"
        )
    # Position of each declared column within the CSV rows.
    positions = [header.index(c.name) for c in defn.columns]
    pk_index = defn.column_index(defn.primary_key)

    rows: list[tuple] = []
    seen_keys: set = set()
    for record, raw in enumerate(reader, start=2):
        if not raw:
            continue  # blank trailing line
        if len(raw) != len(header):
            raise CsvError(
                f"{relation_name}: record {record}: expected {len(header)} fields, got {len(raw)}"
            )
        row = tuple(
            _parse_cell(raw[pos], col, relation_name, record)
            for pos, col in zip(positions, defn.columns)
        )
        key = row[pk_index]
        if key is None:
            raise CsvError(f"{relation_name}: record {record}: primary key {defn.primary_key!r} is null")
        if key in seen_keys:
            raise CsvError(
                f"{relation_name}: record {record}: duplicate primary key {defn.primary_key}={key!r}"
            )
        seen_keys.add(key)
        rows.append(row)
    return Relation(defn, rows)


def build_store(schema: Schema, csv_by_relation: dict[str, bytes | str]) -> Store:
    """Assemble a store; relations without CSV data are loaded empty."""
    relations = {}
    for defn in schema.relations:
        data = csv_by_relation.get(defn.name)
        if data is None:
            relations[defn.name] = Relation(defn, [])
        else:
            relations[defn.name] = ingest_csv(schema, defn.name, data)
    return Store(schema, relations)


def _encode_value(value):
    return value


def snapshot_save(store: Store) -> bytes:
    """Serialize a store to versioned JSON lines; byte-deterministic."""
    out = io.StringIO()
    out.write(json.dumps({_SNAPSHOT_MARKER: SNAPSHOT_VERSION}, separators=(",", ":")))
    out.write("\n")
    for defn in store.schema.relations:
        relation = store.relations[defn.name]
        header = {
            "relation": defn.name,
            "primary_key": defn.primary_key,
            "columns": [[c.name, c.type] for c in defn.columns],
            "tuples": len(relation.rows),
        }
        out.write(json.dumps(header, separators=(",", ":"), ensure_ascii=False))
        out.write("\n")
        for row in relation.rows:
            out.write(json.dumps(list(row), separators=(",", ":"), ensure_ascii=False))
            out.write("\n")
    return out.getvalue().encode("utf-8")


def _decode_value(raw, col: ColumnDef, relation: str):
    if raw is None:
        return None
    if col.type == INT:
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise SnapshotError(f"{relation}: column {col.name!r}: expected int, got {raw!r}")
        return raw
    if col.type == FLOAT:
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise SnapshotError(f"{relation}: column {col.name!r}: expected float, got {raw!r}")
        return float(raw)
    if not isinstance(raw, str):
        raise SnapshotError(f"{relation}: column {col.name!r}: expected text, got {raw!r}")
    return raw


def snapshot_load(data: bytes) -> Store:
    """Rebuild a store from snapshot bytes; inverse of snapshot_save."""
    # Split on "\n" only: JSON escapes real newlines, but text values may
    # legitimately contain other Unicode line separators.
    lines = data.decode("utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise SnapshotError("empty snapshot")

    def parse_line(i: int):
        try:
            return json.loads(lines[i])
        except json.JSONDecodeError as exc:
            raise SnapshotError(f"line {i + 1}: invalid JSON: {exc}") from None

    marker = parse_line(0)
    if not isinstance(marker, dict) or set(marker) != {_SNAPSHOT_MARKER}:
        raise SnapshotError("missing snapshot marker line")
    if marker[_SNAPSHOT_MARKER] != SNAPSHOT_VERSION:
        raise SnapshotError(f"unsupported snapshot version {marker[_SNAPSHOT_MARKER]!r}")

    defs: list[RelationDef] = []
    relations: dict[str, Relation] = {}
    i = 1
    while i < len(lines):
        header = parse_line(i)
        i += 1
        if not isinstance(header, dict) or "relation" not in header:
            raise SnapshotError(f"line {i}: expected a relation header object")
        try:
            name = header["relation"]
            pk = header["primary_key"]
            columns = tuple(ColumnDef(c[0], c[1]) for c in header["columns"])
            count = header["tuples"]
        except (KeyError, TypeError, IndexError):
            raise SnapshotError(f"line {i}: malformed relation header") from None
        if not isinstance(count, int) or count < 0:
            raise SnapshotError(f"line {i}: relation {name!r}: bad tuple count {count!r}")
        for col in columns:
            if col.type not in BASE_COLUMN_TYPES:
                raise SnapshotError(f"relation {name!r}: unknown column type {col.type!r}")
        if name in relations:
            raise SnapshotError(f"duplicate relation section {name!r}")

        defn = RelationDef(name, columns, pk)
        rows: list[tuple] = []
        for _ in range(count):
            if i >= len(lines):
                raise SnapshotError(f"relation {name!r}: truncated after {len(rows)} of {count} tuples")
            raw = parse_line(i)
            i += 1
            if not isinstance(raw, list) or len(raw) != len(columns):
                raise SnapshotError(f"line {i}: relation {name!r}: malformed tuple")
            rows.append(tuple(_decode_value(v, c, name) for v, c in zip(raw, columns)))
        defs.append(defn)
        relations[name] = Relation(defn, rows)
    return Store(Schema(tuple(defs)), relations)
