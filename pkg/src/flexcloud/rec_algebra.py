"""The recommendation-workflow algebra and its reference executor.

A workflow is an ordered list of named bindings over relational operators
(select / project / join), an ``extend`` operator that attaches a derived
rating-map attribute to each tuple, and a ``recommend`` operator that
ranks a candidate tuple set by comparing it against a reference tuple
set, appending a float ``_score`` column. The last binding is the
workflow output.

Evaluation is pure over an immutable store; identical inputs produce
byte-identical output relations (stable sorts, exact float summation via
``math.fsum``).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .relstore import FLOAT, INT, MAP, TEXT, ColumnDef, Relation, RelationDef, Schema, Store
from .textkit import SIMILARITY_FNS, SIMILARITY_IMPLS, tokenize

SCORE_COLUMN = "_score"

AGG_MAX = "max"
AGG_MEAN = "mean"
AGG_SUM = "sum"
AGGREGATIONS = (AGG_MAX, AGG_MEAN, AGG_SUM)

COMPARE_OPS = ("=", "!=", "<", "<=", ">", ">=")

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class ValidationError(ValueError):
    """A workflow or operator input violates the algebra's typing rules."""


class UnknownColumn(ValidationError):
    pass


class TypeMismatch(ValidationError):
    pass


class NameCollision(ValidationError):
    pass


class ModeTypeError(ValidationError):
    """Recommend mode columns do not fit the chosen comparison."""


class UnboundParam(ValidationError):
    """A declared workflow parameter was not supplied at evaluation time."""


# --- AST -----------------------------------------------------------------


@dataclass(frozen=True)
class Param:
    name: str
    type: str  # int | float | text


@dataclass(frozen=True)
class Literal:
    value: object
    type: str


@dataclass(frozen=True)
class ParamRef:
    name: str


@dataclass(frozen=True)
class Comparison:
    column: str
    op: str
    operand: object  # Literal | ParamRef


@dataclass(frozen=True)
class Ref:
    name: str


@dataclass(frozen=True)
class Select:
    child: object
    predicate: tuple  # tuple[Comparison, ...], AND-combined


@dataclass(frozen=True)
class Project:
    child: object
    columns: tuple


@dataclass(frozen=True)
class Join:
    left: object
    right: object
    left_column: str
    right_column: str


@dataclass(frozen=True)
class Extend:
    child: object
    source: object
    group_key: str
    attr_name: str
    key_column: str
    value_column: str


@dataclass(frozen=True)
class Similarity:
    candidate_column: str
    reference_column: str
    fn: str


@dataclass(frozen=True)
class Aggregate:
    value_column: str
    candidate_column: str
    reference_column: str


@dataclass(frozen=True)
class Recommend:
    candidates: object
    reference: object
    mode: object  # Similarity | Aggregate
    agg: str
    top: int | None


@dataclass(frozen=True)
class Workflow:
    name: str
    params: tuple  # tuple[Param, ...]
    bindings: tuple  # tuple[(name, node), ...]; last binding is the output

    @property
    def output_name(self) -> str:
        return self.bindings[-1][0]


def default_agg(mode) -> str:
    return AGG_MAX if isinstance(mode, Similarity) else AGG_MEAN


# --- static typing of nodes ----------------------------------------------


def _is_numeric(col_type: str) -> bool:
    return col_type in (INT, FLOAT)


def _comparable(a: str, b: str) -> bool:
    if a == TEXT or b == TEXT:
        return a == b
    return _is_numeric(a) and _is_numeric(b)


def _column_type(defn: RelationDef, column: str, where: str) -> str:
    if not defn.has_column(column):
        raise UnknownColumn(f"{where}: unknown column {column!r} in {defn.name!r}")
    return defn.column_type(column)


def _check_predicate(defn: RelationDef, predicate, params: dict[str, str]) -> None:
    for comparison in predicate:
        if comparison.op not in COMPARE_OPS:
            raise ValidationError(f"unknown comparison operator {comparison.op!r}")
        col_type = _column_type(defn, comparison.column, "select")
        operand = comparison.operand
        if isinstance(operand, ParamRef):
            if operand.name not in params:
                raise ValidationError(f"select: undeclared parameter ${operand.name}")
            operand_type = params[operand.name]
        else:
            operand_type = operand.type
        if col_type == MAP or not _comparable(col_type, operand_type):
            raise TypeMismatch(
                f"select: cannot compare column {comparison.column!r} ({col_type}) "
                f"with a {operand_type} operand"
            )


def select_def(defn: RelationDef, predicate, params: dict[str, str] | None = None) -> RelationDef:
    _check_predicate(defn, predicate, params or {})
    return defn


def project_def(defn: RelationDef, columns) -> RelationDef:
    seen = set()
    kept = []
    for name in columns:
        _column_type(defn, name, "project")
        if name in seen:
            raise ValidationError(f"project: duplicate column {name!r}")
        seen.add(name)
        kept.append(defn.columns[defn.column_index(name)])
    if not kept:
        raise ValidationError("project: column list is empty")
    pk = defn.primary_key if defn.primary_key in seen else None
    return RelationDef(defn.name, tuple(kept), pk)


def join_def(left: RelationDef, right: RelationDef, left_column: str, right_column: str) -> RelationDef:
    lt = _column_type(left, left_column, "join")
    rt = _column_type(right, right_column, "join")
    if lt == MAP or rt == MAP or not _comparable(lt, rt):
        raise TypeMismatch(f"join: key types {lt} and {rt} do not match")
    columns = list(left.columns)
    names = {c.name for c in columns}
    for col in right.columns:
        if col.name == right_column:
            continue  # the right key duplicates the left key and is dropped
        if col.name in names:
            raise NameCollision(f"join: column {col.name!r} exists on both sides")
        names.add(col.name)
        columns.append(col)
    return RelationDef(left.name, tuple(columns), left.primary_key)


def extend_def(
    child: RelationDef, source: RelationDef, group_key: str, attr_name: str,
    key_column: str, value_column: str,
) -> RelationDef:
    gt_child = _column_type(child, group_key, "extend")
    gt_source = _column_type(source, group_key, "extend")
    if gt_child == MAP or not _comparable(gt_child, gt_source):
        raise TypeMismatch(f"extend: group key {group_key!r} types {gt_child} and {gt_source} do not match")
    if _column_type(source, key_column, "extend") != INT:
        raise TypeMismatch(f"extend: map key column {key_column!r} must be int")
    if not _is_numeric(_column_type(source, value_column, "extend")):
        raise TypeMismatch(f"extend: map value column {value_column!r} must be numeric")
    if not _IDENT_RE.match(attr_name):
        raise ValidationError(f"extend: attribute name {attr_name!r} is not a valid identifier")
    if child.has_column(attr_name):
        raise NameCollision(f"extend: column {attr_name!r} already exists")
    return RelationDef(child.name, child.columns + (ColumnDef(attr_name, MAP),), child.primary_key)


def recommend_def(candidates: RelationDef, reference: RelationDef, mode, agg: str, top) -> RelationDef:
    if agg not in AGGREGATIONS:
        raise ValidationError(f"recommend: unknown aggregation {agg!r}")
    if top is not None and (not isinstance(top, int) or top < 0):
        raise ValidationError(f"recommend: top must be a non-negative count, got {top!r}")
    if candidates.has_column(SCORE_COLUMN):
        raise NameCollision(f"recommend: candidates already carry {SCORE_COLUMN!r}; project it away first")
    if candidates.primary_key is None:
        raise ValidationError("recommend: candidate relation has no primary key to break ties")

    if isinstance(mode, Similarity):
        if mode.fn not in SIMILARITY_FNS:
            raise ValidationError(f"recommend: unknown similarity function {mode.fn!r}")
        ct = _column_type(candidates, mode.candidate_column, "recommend")
        rt = _column_type(reference, mode.reference_column, "recommend")
        if not (ct == rt == TEXT or ct == rt == MAP):
            raise ModeTypeError(
                f"recommend: similarity columns must both be text or both rating maps, got {ct} and {rt}"
            )
        # Jaccard compares token sets; the other two compare rating maps.
        wanted = TEXT if mode.fn == "jaccard" else MAP
        if ct != wanted:
            raise ModeTypeError(f"recommend: {mode.fn} applies to {wanted} columns, got {ct}")
    elif isinstance(mode, Aggregate):
        ct = _column_type(candidates, mode.candidate_column, "recommend")
        rt = _column_type(reference, mode.reference_column, "recommend")
        if ct == MAP or not _comparable(ct, rt):
            raise ModeTypeError(f"recommend: match column types {ct} and {rt} do not match")
        if not _is_numeric(_column_type(reference, mode.value_column, "recommend")):
            raise ModeTypeError(f"recommend: value column {mode.value_column!r} must be numeric")
    else:
        raise ValidationError(f"recommend: unknown mode {mode!r}")
    return RelationDef(
        candidates.name, candidates.columns + (ColumnDef(SCORE_COLUMN, FLOAT),), candidates.primary_key
    )


def validate_workflow(wf: Workflow, schema: Schema) -> dict[str, RelationDef]:
    """Type-check a workflow against a schema; returns each binding's shape."""
    params: dict[str, str] = {}
    for p in wf.params:
        if p.type not in (INT, FLOAT, TEXT):
            raise ValidationError(f"parameter {p.name!r} has unknown type {p.type!r}")
        if p.name in params:
            raise ValidationError(f"duplicate parameter {p.name!r}")
        params[p.name] = p.type

    if not wf.bindings:
        raise ValidationError("workflow has no bindings")

    defs: dict[str, RelationDef] = {}

    def node_def(node) -> RelationDef:
        if isinstance(node, Ref):
            if node.name in defs:
                return defs[node.name]
            if schema.has_relation(node.name):
                return schema.relation(node.name)
            raise ValidationError(f"unknown relation or binding {node.name!r}")
        if isinstance(node, Select):
            return select_def(node_def(node.child), node.predicate, params)
        if isinstance(node, Project):
            return project_def(node_def(node.child), node.columns)
        if isinstance(node, Join):
            return join_def(node_def(node.left), node_def(node.right), node.left_column, node.right_column)
        if isinstance(node, Extend):
            return extend_def(
                node_def(node.child), node_def(node.source),
                node.group_key, node.attr_name, node.key_column, node.value_column,
            )
        if isinstance(node, Recommend):
            return recommend_def(
                node_def(node.candidates), node_def(node.reference), node.mode, node.agg, node.top
            )
        raise ValidationError(f"unknown node {node!r}")

    for name, node in wf.bindings:
        if name in defs:
            raise ValidationError(f"duplicate binding {name!r}")
        if schema.has_relation(name):
            raise ValidationError(f"binding {name!r} shadows a base relation")
        defs[name] = node_def(node)
    return defs


# --- operators ------------------------------------------------------------


_OP_FUNCS = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def _operand_value(operand, args: dict):
    if isinstance(operand, ParamRef):
        if operand.name not in args:
            raise UnboundParam(f"parameter ${operand.name} is not bound")
        return args[operand.name]
    return operand.value


def _value_type(value) -> str:
    if isinstance(value, bool):
        raise ValidationError(f"boolean operand {value!r} is not a relational value")
    if isinstance(value, int):
        return INT
    if isinstance(value, float):
        return FLOAT
    if isinstance(value, str):
        return TEXT
    raise ValidationError(f"operand {value!r} is not a relational value")


def op_select(rel: Relation, predicate, args: dict | None = None) -> Relation:
    """Keep rows satisfying every comparison; null never compares true."""
    args = args or {}
    tests = []
    for comparison in predicate:
        if comparison.op not in COMPARE_OPS:
            raise ValidationError(f"unknown comparison operator {comparison.op!r}")
        col_type = _column_type(rel.defn, comparison.column, "select")
        value = _operand_value(comparison.operand, args)
        if col_type == MAP or not _comparable(col_type, _value_type(value)):
            raise TypeMismatch(
                f"select: cannot compare column {comparison.column!r} ({col_type}) with {value!r}"
            )
        idx = rel.defn.column_index(comparison.column)
        tests.append((idx, _OP_FUNCS[comparison.op], value))
    rows = [
        row
        for row in rel.rows
        if all(row[idx] is not None and fn(row[idx], value) for idx, fn, value in tests)
    ]
    return Relation(rel.defn, rows)


def op_project(rel: Relation, columns) -> Relation:
    """Drop columns without deduplicating rows; order preserved."""
    defn = project_def(rel.defn, columns)
    indexes = [rel.defn.column_index(c) for c in columns]
    return Relation(defn, [tuple(row[i] for i in indexes) for row in rel.rows])


def op_join(left: Relation, right: Relation, left_column: str, right_column: str) -> Relation:
    """Equality join ordered by (left order, right order); null keys never match."""
    defn = join_def(left.defn, right.defn, left_column, right_column)
    li = left.defn.column_index(left_column)
    ri = right.defn.column_index(right_column)
    keep = [i for i, c in enumerate(right.defn.columns) if i != ri]
    by_key: dict = {}
    for row in right.rows:
        key = row[ri]
        if key is None:
            continue
        by_key.setdefault(key, []).append(tuple(row[i] for i in keep))
    rows = []
    for row in left.rows:
        key = row[li]
        if key is None:
            continue
        for rest in by_key.get(key, ()):
            rows.append(row + rest)
    return Relation(defn, rows)


def op_extend(
    rel: Relation, source: Relation, group_key: str, attr_name: str,
    key_column: str, value_column: str,
) -> Relation:
    """Attach to each tuple the rating map built from matching source rows.

    Cardinality and order of ``rel`` are unchanged; rows without matches
    get an empty map; a duplicate map key within one group resolves to the
    latest source row in input order.
    """
    defn = extend_def(rel.defn, source.defn, group_key, attr_name, key_column, value_column)
    gi_rel = rel.defn.column_index(group_key)
    gi_src = source.defn.column_index(group_key)
    ki = source.defn.column_index(key_column)
    vi = source.defn.column_index(value_column)

    raw_groups: dict = {}
    for row in source.rows:
        group, key, value = row[gi_src], row[ki], row[vi]
        if group is None or key is None or value is None:
            continue
        raw_groups.setdefault(group, {})[key] = float(value)
    groups = {g: dict(sorted(m.items())) for g, m in raw_groups.items()}

    rows = []
    for row in rel.rows:
        mapped = groups.get(row[gi_rel]) if row[gi_rel] is not None else None
        rows.append(row + (mapped if mapped is not None else {},))
    return Relation(defn, rows)


def _aggregate(agg: str, values: list[float]) -> float:
    if not values:
        return 0.0
    if agg == AGG_MAX:
        return max(values)
    if agg == AGG_SUM:
        return math.fsum(values)
    return math.fsum(values) / len(values)


def _text_tokens(value) -> list[str]:
    return tokenize(value) if isinstance(value, str) else []


def op_recommend(candidates: Relation, reference: Relation, mode, agg: str | None = None,
                 top: int | None = None) -> Relation:
    """Rank candidates against a reference set, appending ``_score``.

    Similarity mode scores each candidate by aggregating a pairwise
    similarity against every reference tuple; aggregate mode scores it by
    aggregating the reference value column over match-column equality.
    Output is sorted by score descending, candidate primary key ascending;
    ``top`` truncates after sorting. An empty reference scores everything
    0. In aggregate mean/max mode, candidates with no matching reference
    rows also score 0 and are flagged in ``annotations["unmatched"]``.
    """
    agg = agg if agg is not None else default_agg(mode)
    defn = recommend_def(candidates.defn, reference.defn, mode, agg, top)
    pk_idx = candidates.defn.column_index(candidates.defn.primary_key)
    unmatched: list = []

    if isinstance(mode, Similarity):
        ci = candidates.defn.column_index(mode.candidate_column)
        ri = reference.defn.column_index(mode.reference_column)
        fn = SIMILARITY_IMPLS[mode.fn]
        is_text = candidates.defn.column_type(mode.candidate_column) == TEXT
        if is_text:
            ref_values = [_text_tokens(row[ri]) for row in reference.rows]
        else:
            ref_values = [row[ri] if row[ri] is not None else {} for row in reference.rows]

        def score_row(row):
            value = _text_tokens(row[ci]) if is_text else (row[ci] if row[ci] is not None else {})
            return _aggregate(agg, [fn(value, rv) for rv in ref_values])

        scored = [(row, score_row(row)) for row in candidates.rows]
    else:
        ci = candidates.defn.column_index(mode.candidate_column)
        ri = reference.defn.column_index(mode.reference_column)
        vi = reference.defn.column_index(mode.value_column)
        groups: dict = {}
        for row in reference.rows:
            match, value = row[ri], row[vi]
            if match is None or value is None:
                continue
            groups.setdefault(match, []).append(float(value))
        scored = []
        for row in candidates.rows:
            values = groups.get(row[ci]) if row[ci] is not None else None
            if not values:
                if agg in (AGG_MEAN, AGG_MAX):
                    unmatched.append(row[pk_idx])
                scored.append((row, 0.0))
            else:
                scored.append((row, _aggregate(agg, values)))

    scored.sort(key=lambda pair: (-pair[1], pair[0][pk_idx]))
    if top is not None:
        scored = scored[:top]
    out = Relation(defn, [row + (score,) for row, score in scored])
    if isinstance(mode, Aggregate) and agg in (AGG_MEAN, AGG_MAX):
        out.annotations["unmatched"] = tuple(unmatched)
    return out


# --- executor -------------------------------------------------------------


def check_args(wf: Workflow, args: dict) -> dict:
    """Validate and coerce evaluated-parameter bindings against declarations."""
    out = {}
    declared = {p.name: p.type for p in wf.params}
    for name in args:
        if name not in declared:
            raise ValidationError(f"unknown parameter {name!r}")
    for name, ptype in declared.items():
        if name not in args:
            raise UnboundParam(f"parameter ${name} is not bound")
        value = args[name]
        if ptype == INT:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValidationError(f"parameter ${name} must be an int, got {value!r}")
        elif ptype == FLOAT:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError(f"parameter ${name} must be a float, got {value!r}")
            value = float(value)
        else:
            if not isinstance(value, str):
                raise ValidationError(f"parameter ${name} must be text, got {value!r}")
        out[name] = value
    return out


def eval_workflow(store: Store, wf: Workflow, args: dict | None = None) -> Relation:
    """Evaluate bindings in order and return the output binding's relation."""
    validate_workflow(wf, store.schema)
    bound = check_args(wf, args or {})
    env: dict[str, Relation] = {}

    def eval_node(node) -> Relation:
        if isinstance(node, Ref):
            if node.name in env:
                return env[node.name]
            return store.relations[node.name]
        if isinstance(node, Select):
            return op_select(eval_node(node.child), node.predicate, bound)
        if isinstance(node, Project):
            return op_project(eval_node(node.child), node.columns)
        if isinstance(node, Join):
            return op_join(eval_node(node.left), eval_node(node.right), node.left_column, node.right_column)
        if isinstance(node, Extend):
            return op_extend(
                eval_node(node.child), eval_node(node.source),
                node.group_key, node.attr_name, node.key_column, node.value_column,
            )
        if isinstance(node, Recommend):
            return op_recommend(
                eval_node(node.candidates), eval_node(node.reference), node.mode, node.agg, node.top
            )
        raise ValidationError(f"unknown node {node!r}")

    for name, node in wf.bindings:
        env[name] = eval_node(node)
    return env[wf.output_name]
