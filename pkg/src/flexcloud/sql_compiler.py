"""Compile a workflow into an ordered SQL script matching the executor.

The target is a single ANSI-leaning dialect executed as a sequence of
statements on a fresh session: one ``CREATE TEMP TABLE`` per operator,
then a final ``SELECT`` producing the workflow output with a
deterministic ``ORDER BY``. Nothing mutates base tables.

Row-order semantics ride on a bookkeeping column ``_ord``: the host is
expected to materialize every base relation with its columns plus
``_ord`` (the 0-based tuple position), and each compiled operator
maintains ``_ord`` to encode its own output order. The ranking operator
rebuilds it from ``ROW_NUMBER() OVER (ORDER BY _score DESC, pk ASC, _ord
ASC)`` so ties replay the executor's stable sort exactly.

Similarity functions cannot be expressed in portable SQL, so compiled
scripts call three scalar UDFs the host must register (see
``REQUIRED_UDFS`` and the README contract). Rating-map attributes cross
the SQL boundary as canonical serialized text: ascending ``key:value``
pairs joined by ``;`` with C-style ``%.17g`` float formatting, which
round-trips doubles exactly.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .rec_algebra import (
    Aggregate,
    AGG_MAX,
    AGG_SUM,
    Comparison,
    Extend,
    Join,
    Literal,
    ParamRef,
    Project,
    Recommend,
    Ref,
    SCORE_COLUMN,
    Select,
    Similarity,
    Workflow,
    check_args,
    extend_def,
    join_def,
    project_def,
    recommend_def,
    select_def,
    validate_workflow,
)
from .relstore import TEXT, RelationDef, Schema

ANSI = "ansi"
ORD_COLUMN = "_ord"
REQUIRED_UDFS = ("sim_jaccard", "sim_pearson", "sim_inv_euclidean")

_AGG_SQL = {AGG_MAX: "MAX", AGG_SUM: "SUM", "mean": "AVG"}
_UDF_BY_FN = {"jaccard": "sim_jaccard", "pearson": "sim_pearson", "inv_euclidean": "sim_inv_euclidean"}

_MAP_KEY_RE = re.compile(r"-?[0-9]+\Z")


class UnsupportedDialect(ValueError):
    pass


class MapTextError(ValueError):
    """Serialized rating-map text is malformed or non-canonical."""


def format_float(value: float) -> str:
    """C-style %.17g: enough digits to round-trip any finite double."""
    return f"{float(value):.17g}"


def canonical_map_text(mapping: dict) -> str:
    """Serialize a rating map as ascending-key ``k:v;k:v`` text; {} -> ""."""
    return ";".join(f"{k}:{format_float(v)}" for k, v in sorted(mapping.items()))


def parse_map_text(text: str) -> dict:
    """Inverse of canonical_map_text; rejects malformed or unordered input."""
    if not isinstance(text, str):
        raise MapTextError(f"expected map text, got {text!r}")
    if text == "":
        return {}
    out: dict = {}
    last_key = None
    for part in text.split(";"):
        key_text, sep, value_text = part.partition(":")
        if not sep or not _MAP_KEY_RE.match(key_text):
            raise MapTextError(f"malformed map entry {part!r}")
        key = int(key_text)
        try:
            value = float(value_text)
        except ValueError:
            raise MapTextError(f"malformed map value {value_text!r}") from None
        if math.isnan(value) or math.isinf(value):
            raise MapTextError(f"map value {value_text!r} is not finite")
        if last_key is not None and key <= last_key:
            raise MapTextError(f"map keys not strictly ascending at {key}")
        last_key = key
        out[key] = value
    return out


@dataclass(frozen=True)
class SqlScript:
    statements: tuple
    temp_objects: tuple
    required_udfs: tuple


def _sql_literal(value) -> str:
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _comparison_sql(comparison: Comparison, args: dict) -> str:
    operand = comparison.operand
    value = args[operand.name] if isinstance(operand, ParamRef) else operand.value
    op = "<>" if comparison.op == "!=" else comparison.op
    return f"{comparison.column} {op} {_sql_literal(value)}"


def compile_workflow(schema: Schema, wf: Workflow, args: dict | None = None,
                     dialect: str = ANSI) -> SqlScript:
    """Compile a validated workflow with fully bound parameters to SQL."""
    if dialect != ANSI:
        raise UnsupportedDialect(f"unsupported SQL dialect {dialect!r}")
    validate_workflow(wf, schema)
    bound = check_args(wf, args or {})

    statements: list[str] = []
    temp_objects: list[str] = []
    env: dict[str, tuple[str, RelationDef]] = {}
    counter = 0
    udfs_used: set[str] = set()

    def fresh_name(binding: str) -> str:
        nonlocal counter
        counter += 1
        return f"wf_{wf.name}_{binding}_{counter}"

    def create(binding: str, defn: RelationDef, body: str) -> tuple[str, RelationDef]:
        name = fresh_name(binding)
        temp_objects.append(name)
        statements.append(f"CREATE TEMP TABLE {name} AS\n{body}")
        return name, defn

    def emit(node, binding: str) -> tuple[str, RelationDef]:
        if isinstance(node, Ref):
            if node.name in env:
                return env[node.name]
            return node.name, schema.relation(node.name)

        if isinstance(node, Select):
            table, child_def = emit(node.child, binding)
            defn = select_def(child_def, node.predicate, {p.name: p.type for p in wf.params})
            cols = ", ".join(child_def.column_names())
            conds = "\n  AND ".join(_comparison_sql(c, bound) for c in node.predicate)
            return create(binding, defn, f"SELECT {cols}, {ORD_COLUMN}\nFROM {table}\nWHERE {conds}")

        if isinstance(node, Project):
            table, child_def = emit(node.child, binding)
            defn = project_def(child_def, node.columns)
            cols = ", ".join(node.columns)
            return create(binding, defn, f"SELECT {cols}, {ORD_COLUMN}\nFROM {table}")

        if isinstance(node, Join):
            left_table, left_def = emit(node.left, binding)
            right_table, right_def = emit(node.right, binding)
            defn = join_def(left_def, right_def, node.left_column, node.right_column)
            select_cols = [f"l.{c} AS {c}" for c in left_def.column_names()]
            select_cols += [
                f"r.{c} AS {c}" for c in right_def.column_names() if c != node.right_column
            ]
            ord_expr = (
                f"l.{ORD_COLUMN} * (SELECT COALESCE(MAX({ORD_COLUMN}), 0) + 1 FROM {right_table})"
                f" + r.{ORD_COLUMN} AS {ORD_COLUMN}"
            )
            body = (
                f"SELECT {', '.join(select_cols)},\n       {ord_expr}\n"
                f"FROM {left_table} l\nJOIN {right_table} r ON l.{node.left_column} = r.{node.right_column}"
            )
            return create(binding, defn, body)

        if isinstance(node, Extend):
            child_table, child_def = emit(node.child, binding)
            source_table, source_def = emit(node.source, binding)
            defn = extend_def(
                child_def, source_def, node.group_key, node.attr_name, node.key_column, node.value_column
            )
            g, k, v = node.group_key, node.key_column, node.value_column
            # Latest source row wins per (group, key): keep the max-_ord row.
            pairs_name, _ = create(
                binding,
                defn,
                f"SELECT b.{g} AS grp, b.{k} AS k, CAST(b.{v} AS REAL) AS v\n"
                f"FROM {source_table} b\n"
                f"JOIN (\n"
                f"  SELECT {g} AS grp, {k} AS k, MAX({ORD_COLUMN}) AS last_ord\n"
                f"  FROM {source_table}\n"
                f"  WHERE {g} IS NOT NULL AND {k} IS NOT NULL AND {v} IS NOT NULL\n"
                f"  GROUP BY {g}, {k}\n"
                f") last ON b.{g} = last.grp AND b.{k} = last.k AND b.{ORD_COLUMN} = last.last_ord",
            )
            maps_name, _ = create(
                binding,
                defn,
                "SELECT grp, map_text FROM (\n"
                "  SELECT grp,\n"
                "         group_concat(CAST(k AS TEXT) || ':' || printf('%.17g', v), ';')\n"
                "           OVER (PARTITION BY grp ORDER BY k ASC\n"
                "                 ROWS BETWEEN UNBOUNDED PRECEDING AND CURRENT ROW) AS map_text,\n"
                "         ROW_NUMBER() OVER (PARTITION BY grp ORDER BY k DESC) AS rn\n"
                f"  FROM {pairs_name}\n"
                ") ranked WHERE rn = 1",
            )
            cols = ", ".join(f"a.{c} AS {c}" for c in child_def.column_names())
            body = (
                f"SELECT {cols}, COALESCE(m.map_text, '') AS {node.attr_name}, "
                f"a.{ORD_COLUMN} AS {ORD_COLUMN}\n"
                f"FROM {child_table} a\nLEFT JOIN {maps_name} m ON a.{g} = m.grp"
            )
            return create(binding, defn, body)

        if isinstance(node, Recommend):
            cand_table, cand_def = emit(node.candidates, binding)
            ref_table, ref_def = emit(node.reference, binding)
            defn = recommend_def(cand_def, ref_def, node.mode, node.agg, node.top)
            agg_sql = _AGG_SQL[node.agg]
            cand_cols = cand_def.column_names()
            select_cols = ", ".join(f"c.{c} AS {c}" for c in cand_cols)
            group_cols = ", ".join([f"c.{c}" for c in cand_cols] + [f"c.{ORD_COLUMN}"])
            if isinstance(node.mode, Similarity):
                udf = _UDF_BY_FN[node.mode.fn]
                udfs_used.add(udf)
                score = f"{udf}(c.{node.mode.candidate_column}, r.{node.mode.reference_column})"
                join_clause = f"LEFT JOIN {ref_table} r ON 1 = 1"
            else:
                score = f"r.{node.mode.value_column}"
                join_clause = (
                    f"LEFT JOIN {ref_table} r "
                    f"ON c.{node.mode.candidate_column} = r.{node.mode.reference_column} "
                    f"AND r.{node.mode.value_column} IS NOT NULL"
                )
            inner = (
                f"  SELECT {select_cols}, c.{ORD_COLUMN} AS {ORD_COLUMN},\n"
                f"         COALESCE(CAST({agg_sql}({score}) AS REAL), 0.0) AS {SCORE_COLUMN}\n"
                f"  FROM {cand_table} c\n"
                f"  {join_clause}\n"
                f"  GROUP BY {group_cols}"
            )
            pk = cand_def.primary_key
            ranked = (
                f"SELECT {', '.join(cand_cols)}, {SCORE_COLUMN},\n"
                f"       ROW_NUMBER() OVER (ORDER BY {SCORE_COLUMN} DESC, {pk} ASC, {ORD_COLUMN} ASC)"
                f" - 1 AS {ORD_COLUMN}\nFROM (\n{inner}\n) scored"
            )
            if node.top is not None:
                body = f"SELECT * FROM (\n{ranked}\n) ranked WHERE {ORD_COLUMN} < {node.top}"
            else:
                body = ranked
            return create(binding, defn, body)

        raise TypeError(f"not a workflow node: {node!r}")

    output_table = ""
    output_def: RelationDef | None = None
    output_node = None
    for name, node in wf.bindings:
        env[name] = emit(node, name)
        output_table, output_def = env[name]
        output_node = node

    cols = ", ".join(output_def.column_names())
    if isinstance(output_node, Recommend):
        pk = output_def.primary_key
        order = f"{SCORE_COLUMN} DESC, {pk} ASC, {ORD_COLUMN} ASC"
    else:
        order = f"{ORD_COLUMN} ASC"
    statements.append(f"SELECT {cols}\nFROM {output_table}\nORDER BY {order}")

    required = tuple(u for u in REQUIRED_UDFS if u in udfs_used)
    return SqlScript(tuple(statements), tuple(temp_objects), required)


def script_text(script: SqlScript) -> str:
    """Render a script as one .sql file with `-- statement N` separators."""
    parts = []
    for i, statement in enumerate(script.statements, start=1):
        parts.append(f"-- statement {i}\n{statement};\n")
    return "\n".join(parts)
