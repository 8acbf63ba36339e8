"""Textual workflow language: parser to the algebra AST, and a formatter.

Grammar (LL, `#` starts a line comment, keywords are lowercase and
reserved):

    workflow   = "workflow" IDENT "(" [param {"," param}] ")" ":" binding+
    param      = IDENT ":" ("int" | "float" | "text")
    binding    = IDENT "=" expr
    expr       = IDENT | "(" expr ")" | select | project | join | extend | recommend
    select     = "select" expr "where" conj {"and" conj}
    conj       = COLUMN OP (literal | "$" IDENT)
    project    = "project" expr "on" COLUMN {"," COLUMN}
    join       = "join" expr "," expr "on" COLUMN "=" COLUMN
    extend     = "extend" expr "with" IDENT "from" expr
                 "key" COLUMN "map" "(" COLUMN "->" COLUMN ")"
    recommend  = "recommend" expr "against" expr
                 ( "compare" COLUMN "~" COLUMN "using" SIMFN
                 | "aggregate" COLUMN "match" COLUMN "=" COLUMN )
                 ["agg" ("max" | "mean" | "sum")] ["top" INT]

The last binding is the workflow output. ``parse`` never raises on bad
input: it returns either a complete AST or error diagnostics, nothing in
between. When ``agg`` is omitted the parser fills the mode default (max
for compare, mean for aggregate), so ``format`` always prints it and
``parse(format(ast)) == ast``.

Parentheses exist because ``join``'s separating comma is otherwise
ambiguous against a trailing ``project`` column list in its left operand;
the formatter parenthesizes composite join operands, and parsing is
greedy everywhere else.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .rec_algebra import (
    Aggregate,
    AGGREGATIONS,
    COMPARE_OPS,
    Comparison,
    Extend,
    Join,
    Literal,
    Param,
    ParamRef,
    Project,
    Recommend,
    Ref,
    Select,
    Similarity,
    Workflow,
    default_agg,
)
from .relstore import FLOAT, INT, TEXT
from .textkit import SIMILARITY_FNS

KEYWORDS = frozenset((
    "workflow", "select", "where", "and", "project", "on", "join", "extend",
    "with", "from", "key", "map", "recommend", "against", "compare", "using",
    "aggregate", "match", "agg", "top", "int", "float", "text",
    "max", "mean", "sum", "jaccard", "pearson", "inv_euclidean",
))

_IDENT_START = re.compile(r"[A-Za-z_]")
_IDENT_BODY = re.compile(r"[A-Za-z0-9_]")
_NUMBER = re.compile(r"-?[0-9]+(?:(?P<frac>\.[0-9]+)(?:[eE][+-]?[0-9]+)?|(?P<exp>[eE][+-]?[0-9]+))?")

_PUNCT = ("->", "!=", "<=", ">=", "(", ")", ":", ",", "=", "<", ">", "~", "$")


@dataclass(frozen=True)
class SourceSpan:
    """Byte offsets into the UTF-8 source plus the 1-based start line/column."""

    start: int
    end: int
    line: int
    column: int


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str  # "error" | "warning"
    message: str
    span: SourceSpan


@dataclass(frozen=True)
class ParseResult:
    workflow: Workflow | None
    diagnostics: tuple

    @property
    def ok(self) -> bool:
        return self.workflow is not None


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident" | "int" | "float" | "string" | "eof" | keyword / punct text
    text: str
    value: object
    span: SourceSpan


class _Abort(Exception):
    def __init__(self, diagnostic: ParseDiagnostic):
        self.diagnostic = diagnostic


def _lex(source: str) -> list[_Token]:
    # Byte offset of every character position, so spans are byte-addressed.
    # surrogatepass keeps fuzzed lone surrogates from crashing the lexer.
    byte_at = [0]
    for ch in source:
        byte_at.append(byte_at[-1] + len(ch.encode("utf-8", "surrogatepass")))

    tokens: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(source)

    def span(start_i: int, end_i: int, start_line: int, start_col: int) -> SourceSpan:
        return SourceSpan(byte_at[start_i], byte_at[end_i], start_line, start_col)

    def fail(message: str, start_i: int, start_line: int, start_col: int):
        raise _Abort(ParseDiagnostic("error", message, span(start_i, min(start_i + 1, n), start_line, start_col)))

    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
                col += 1
            continue

        start_i, start_line, start_col = i, line, col
        if _IDENT_START.match(ch):
            j = i + 1
            while j < n and _IDENT_BODY.match(source[j]):
                j += 1
            text = source[i:j]
            kind = text if text in KEYWORDS else "ident"
            tokens.append(_Token(kind, text, text, span(i, j, line, col)))
            col += j - i
            i = j
            continue
        if ch in "0123456789" or (ch == "-" and i + 1 < n and source[i + 1] in "0123456789"):
            m = _NUMBER.match(source, i)
            text = m.group(0)
            if m.group("frac") or m.group("exp"):
                tokens.append(_Token("floatlit", text, float(text), span(i, m.end(), line, col)))
            else:
                tokens.append(_Token("intlit", text, int(text), span(i, m.end(), line, col)))
            col += m.end() - i
            i = m.end()
            continue
        if ch == '"':
            j = i + 1
            parts: list[str] = []
            while True:
                if j >= n or source[j] == "\n":
                    fail("unterminated string literal", start_i, start_line, start_col)
                c = source[j]
                if c == '"':
                    j += 1
                    break
                if c == "\\":
                    if j + 1 >= n:
                        fail("unterminated string literal", start_i, start_line, start_col)
                    esc = source[j + 1]
                    mapped = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}.get(esc)
                    if mapped is None:
                        fail(f"unknown escape '\\{esc}'", j, line, col + (j - i))
                    parts.append(mapped)
                    j += 2
                else:
                    parts.append(c)
                    j += 1
            tokens.append(_Token("stringlit", source[i:j], "".join(parts), span(i, j, line, col)))
            col += j - i
            i = j
            continue
        for punct in _PUNCT:
            if source.startswith(punct, i):
                tokens.append(_Token(punct, punct, punct, span(i, i + len(punct), line, col)))
                col += len(punct)
                i += len(punct)
                break
        else:
            fail(f"unexpected character {ch!r}", i, line, col)

    tokens.append(_Token("eof", "", None, span(n, n, line, col)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.declared_params: set[str] = set()

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        token = self.tokens[self.pos]
        if token.kind != "eof":
            self.pos += 1
        return token

    def error(self, message: str, token: _Token | None = None):
        token = token or self.peek()
        raise _Abort(ParseDiagnostic("error", message, token.span))

    def expect(self, kind: str, what: str) -> _Token:
        token = self.peek()
        if token.kind != kind:
            self.error(f"expected {what}", token)
        return self.advance()

    def ident(self, what: str) -> str:
        token = self.peek()
        if token.kind != "ident":
            self.error(f"expected {what}", token)
        return self.advance().text

    # -- grammar ----------------------------------------------------------

    def workflow(self) -> Workflow:
        self.expect("workflow", "'workflow'")
        name = self.ident("a workflow name")
        self.expect("(", "'('")
        params: list[Param] = []
        if self.peek().kind != ")":
            while True:
                params.append(self.param())
                if self.peek().kind != ",":
                    break
                self.advance()
        self.expect(")", "')'")
        self.expect(":", "':'")

        seen = {p.name for p in params}
        if len(seen) != len(params):
            self.error("duplicate parameter name")
        self.declared_params = seen
        bindings: list[tuple[str, object]] = []
        bound: set[str] = set()
        while self.peek().kind != "eof":
            token = self.peek()
            binding_name = self.ident("a binding name")
            if binding_name in bound:
                self.error(f"duplicate binding {binding_name!r}", token)
            bound.add(binding_name)
            self.expect("=", "'='")
            bindings.append((binding_name, self.expr()))
        if not bindings:
            self.error("expected at least one binding")
        return Workflow(name, tuple(params), tuple(bindings))

    def param(self) -> Param:
        name = self.ident("a parameter name")
        self.expect(":", "':'")
        token = self.peek()
        if token.kind not in (INT, FLOAT, TEXT):
            self.error("expected a parameter type ('int', 'float' or 'text')", token)
        return Param(name, self.advance().kind)

    def expr(self):
        token = self.peek()
        if token.kind == "ident":
            return Ref(self.advance().text)
        if token.kind == "(":
            self.advance()
            inner = self.expr()
            self.expect(")", "')'")
            return inner
        if token.kind == "select":
            self.advance()
            child = self.expr()
            self.expect("where", "'where'")
            predicate = [self.conj()]
            while self.peek().kind == "and":
                self.advance()
                predicate.append(self.conj())
            return Select(child, tuple(predicate))
        if token.kind == "project":
            self.advance()
            child = self.expr()
            self.expect("on", "'on'")
            columns = [self.ident("a column name")]
            while self.peek().kind == ",":
                self.advance()
                columns.append(self.ident("a column name"))
            return Project(child, tuple(columns))
        if token.kind == "join":
            self.advance()
            left = self.expr()
            self.expect(",", "','")
            right = self.expr()
            self.expect("on", "'on'")
            left_column = self.ident("a column name")
            self.expect("=", "'='")
            right_column = self.ident("a column name")
            return Join(left, right, left_column, right_column)
        if token.kind == "extend":
            self.advance()
            child = self.expr()
            self.expect("with", "'with'")
            attr_name = self.ident("an attribute name")
            self.expect("from", "'from'")
            source = self.expr()
            self.expect("key", "'key'")
            group_key = self.ident("a column name")
            self.expect("map", "'map'")
            self.expect("(", "'('")
            key_column = self.ident("a column name")
            self.expect("->", "'->'")
            value_column = self.ident("a column name")
            self.expect(")", "')'")
            return Extend(child, source, group_key, attr_name, key_column, value_column)
        if token.kind == "recommend":
            self.advance()
            candidates = self.expr()
            self.expect("against", "'against'")
            reference = self.expr()
            mode_token = self.peek()
            if mode_token.kind == "compare":
                self.advance()
                candidate_column = self.ident("a column name")
                self.expect("~", "'~'")
                reference_column = self.ident("a column name")
                self.expect("using", "'using'")
                fn_token = self.peek()
                if fn_token.kind not in SIMILARITY_FNS:
                    self.error(
                        "expected a similarity function ('jaccard', 'pearson' or 'inv_euclidean')",
                        fn_token,
                    )
                mode = Similarity(candidate_column, reference_column, self.advance().kind)
            elif mode_token.kind == "aggregate":
                self.advance()
                value_column = self.ident("a column name")
                self.expect("match", "'match'")
                candidate_column = self.ident("a column name")
                self.expect("=", "'='")
                reference_column = self.ident("a column name")
                mode = Aggregate(value_column, candidate_column, reference_column)
            else:
                self.error("expected 'compare' or 'aggregate'", mode_token)
            agg = None
            if self.peek().kind == "agg":
                self.advance()
                agg_token = self.peek()
                if agg_token.kind not in AGGREGATIONS:
                    self.error("expected one of 'max', 'mean' or 'sum'", agg_token)
                agg = self.advance().kind
            top = None
            if self.peek().kind == "top":
                self.advance()
                top_token = self.expect("intlit", "a count")
                if top_token.value < 0:
                    self.error("top must be a non-negative count", top_token)
                top = top_token.value
            return Recommend(candidates, reference, mode, agg or default_agg(mode), top)
        self.error("expected an expression", token)

    def conj(self) -> Comparison:
        column = self.ident("a column name")
        op_token = self.peek()
        if op_token.kind not in COMPARE_OPS:
            self.error("expected a comparison operator", op_token)
        self.advance()
        return Comparison(column, op_token.kind, self.operand())

    def operand(self):
        token = self.peek()
        if token.kind == "$":
            self.advance()
            name_token = self.peek()
            name = self.ident("a parameter name")
            if name not in self.declared_params:
                self.error(f"undeclared parameter ${name}", name_token)
            return ParamRef(name)
        if token.kind == "intlit":
            return Literal(self.advance().value, INT)
        if token.kind == "floatlit":
            return Literal(self.advance().value, FLOAT)
        if token.kind == "stringlit":
            return Literal(self.advance().value, TEXT)
        self.error("expected a literal or '$param'", token)


def parse(source: str) -> ParseResult:
    """Parse workflow source text; returns a full AST or error diagnostics."""
    try:
        tokens = _lex(source)
        workflow = _Parser(tokens).workflow()
        return ParseResult(workflow, ())
    except _Abort as abort:
        return ParseResult(None, (abort.diagnostic,))
    except RecursionError:
        top = SourceSpan(0, 0, 1, 1)
        return ParseResult(None, (ParseDiagnostic("error", "expression nesting too deep", top),))


def _quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{escaped}"'


def _fmt_operand(operand) -> str:
    if isinstance(operand, ParamRef):
        return f"${operand.name}"
    if operand.type == TEXT:
        return _quote(operand.value)
    return repr(operand.value) if operand.type == FLOAT else str(operand.value)


def _fmt_join_operand(node) -> str:
    # Composite operands are parenthesized so join's comma stays unambiguous.
    if isinstance(node, Ref):
        return node.name
    return f"({_fmt_expr(node)})"


def _fmt_expr(node) -> str:
    if isinstance(node, Ref):
        return node.name
    if isinstance(node, Select):
        conjs = " and ".join(f"{c.column} {c.op} {_fmt_operand(c.operand)}" for c in node.predicate)
        return f"select {_fmt_expr(node.child)} where {conjs}"
    if isinstance(node, Project):
        return f"project {_fmt_expr(node.child)} on {', '.join(node.columns)}"
    if isinstance(node, Join):
        return (
            f"join {_fmt_join_operand(node.left)}, {_fmt_join_operand(node.right)} "
            f"on {node.left_column} = {node.right_column}"
        )
    if isinstance(node, Extend):
        return (
            f"extend {_fmt_expr(node.child)} with {node.attr_name} from {_fmt_expr(node.source)} "
            f"key {node.group_key} map ({node.key_column} -> {node.value_column})"
        )
    if isinstance(node, Recommend):
        if isinstance(node.mode, Similarity):
            mode = (
                f"compare {node.mode.candidate_column} ~ {node.mode.reference_column} "
                f"using {node.mode.fn}"
            )
        else:
            mode = (
                f"aggregate {node.mode.value_column} "
                f"match {node.mode.candidate_column} = {node.mode.reference_column}"
            )
        text = f"recommend {_fmt_expr(node.candidates)} against {_fmt_expr(node.reference)} {mode}"
        text += f" agg {node.agg}"
        if node.top is not None:
            text += f" top {node.top}"
        return text
    raise TypeError(f"not a workflow node: {node!r}")


def format(wf: Workflow) -> str:
    """Canonical source text; ``parse(format(wf)).workflow == wf``."""
    params = ", ".join(f"{p.name}: {p.type}" for p in wf.params)
    lines = [f"workflow {wf.name}({params}):"]
    for name, node in wf.bindings:
        lines.append(f"  {name} = {_fmt_expr(node)}")
    return "\n".join(lines) + "\n"
