"""sqlite harness for compiled scripts: the "conforming SQL engine".

Implements the host-side contract the compiler documents:
  * every base relation is materialized as a table holding its columns
    plus ``_ord``, the 0-based tuple position;
  * the three similarity UDFs are registered as deterministic scalar
    functions over text arguments (rating maps arrive as canonical text);
  * each script statement runs in order on one private session.
"""

from __future__ import annotations

import math
import sqlite3

from flexcloud import textkit
from flexcloud.relstore import Relation, Store
from flexcloud.sql_compiler import SqlScript, canonical_map_text, parse_map_text

_SQL_TYPES = {"int": "INTEGER", "float": "REAL", "text": "TEXT", "map": "TEXT"}


def _udf_jaccard(a, b) -> float:
    return textkit.sim_jaccard(
        textkit.tokenize(a) if isinstance(a, str) else [],
        textkit.tokenize(b) if isinstance(b, str) else [],
    )


def _udf_pearson(a, b) -> float:
    return textkit.sim_pearson(
        parse_map_text(a) if isinstance(a, str) else {},
        parse_map_text(b) if isinstance(b, str) else {},
    )


def _udf_inv_euclidean(a, b) -> float:
    return textkit.sim_inv_euclidean(
        parse_map_text(a) if isinstance(a, str) else {},
        parse_map_text(b) if isinstance(b, str) else {},
    )


def register_udfs(con: sqlite3.Connection) -> None:
    con.create_function("sim_jaccard", 2, _udf_jaccard, deterministic=True)
    con.create_function("sim_pearson", 2, _udf_pearson, deterministic=True)
    con.create_function("sim_inv_euclidean", 2, _udf_inv_euclidean, deterministic=True)


def load_sqlite(store: Store) -> sqlite3.Connection:
    con = sqlite3.connect(":memory:")
    register_udfs(con)
    for name, relation in store.relations.items():
        cols = ", ".join(f"{c.name} {_SQL_TYPES[c.type]}" for c in relation.defn.columns)
        con.execute(f"CREATE TABLE {name} ({cols}, _ord INTEGER)")
        placeholders = ", ".join("?" for _ in range(len(relation.defn.columns) + 1))
        con.executemany(
            f"INSERT INTO {name} VALUES ({placeholders})",
            [tuple(row) + (i,) for i, row in enumerate(relation.rows)],
        )
    con.commit()
    return con


def execute_script(con: sqlite3.Connection, script: SqlScript):
    """Run all statements; returns (column_names, rows) of the final SELECT."""
    cursor = None
    for statement in script.statements:
        cursor = con.execute(statement)
    assert cursor is not None
    columns = [d[0] for d in cursor.description]
    return columns, cursor.fetchall()


def diff_rows(expected: Relation, sql_columns, sql_rows, score_tol=1e-9):
    """Compare executor output with SQL output; returns a failure message or None.

    Scalars compare exactly; ``_score`` within ``score_tol``; rating maps
    by parsed keys (exact) and values (within ``score_tol``) since sqlite's
    float-to-text conversion is capped below 17 significant digits.
    """
    exp_columns = list(expected.defn.column_names())
    if sql_columns != exp_columns:
        return f"columns differ: {sql_columns} != {exp_columns}"
    if len(sql_rows) != len(expected.rows):
        return f"row count differs: {len(sql_rows)} != {len(expected.rows)}"
    types = [c.type for c in expected.defn.columns]
    names = exp_columns
    for r, (exp_row, got_row) in enumerate(zip(expected.rows, sql_rows)):
        for i, (exp, got) in enumerate(zip(exp_row, got_row)):
            where = f"row {r} column {names[i]}"
            if types[i] == "map":
                if got is None:
                    return f"{where}: map came back NULL"
                try:
                    got_map = parse_map_text(got)
                except Exception as exc:
                    return f"{where}: unparseable map text {got!r}: {exc}"
                if sorted(got_map) != sorted(exp):
                    return f"{where}: map keys differ: {got!r} != {canonical_map_text(exp)!r}"
                for key, value in exp.items():
                    if not math.isclose(got_map[key], value, rel_tol=0, abs_tol=score_tol):
                        return f"{where}: map value {key} differs: {got_map[key]} != {value}"
            elif names[i] == "_score":
                if got is None or not math.isclose(float(got), exp, rel_tol=0, abs_tol=score_tol):
                    return f"{where}: score differs: {got!r} != {exp!r}"
            else:
                if exp is None:
                    if got is not None:
                        return f"{where}: expected NULL, got {got!r}"
                elif types[i] == "float":
                    if got != exp:
                        return f"{where}: {got!r} != {exp!r}"
                elif got != exp:
                    return f"{where}: {got!r} != {exp!r}"
    return None


def base_table_counts(con: sqlite3.Connection, store: Store) -> dict[str, int]:
    return {
        name: con.execute(f"SELECT COUNT(*) FROM {name}").fetchone()[0]
        for name in store.relations
    }
