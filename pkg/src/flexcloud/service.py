"""Read-only HTTP JSON API over a snapshot, plus the payload builders the
CLI shares so that ``--json`` output and HTTP bodies are byte-identical.

Endpoints (all JSON, UTF-8, object keys sorted):

    GET  /v1/health
    GET  /v1/search?q=...&entity=course&limit=20
    GET  /v1/cloud?q=...&entity=course&k=30[&click=term]
    GET  /v1/workflows
    POST /v1/workflows/{name}/run   body {"params": {...}, "top": n?}
    POST /v1/workflows/{name}/sql   body {"params": {...}}

Errors are ``{"code": ..., "message": ...}`` with 4xx for caller faults.
The optional ``click`` parameter applies refine-by-click server-side and
is the path that can answer 409 STALE_TERM; plain clients may instead
just re-query with the clicked term appended to ``q``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, unquote, urlparse

from . import data_cloud, entity_search, jsonio, rec_algebra, relstore, sql_compiler, workflow_dsl
from .data_cloud import DataCloud, StaleTerm, compute_cloud, refine
from .entity_search import EmptyQuery, QueryError, SearchIndex, SearchResult, parse_query, search
from .rec_algebra import UnboundParam, ValidationError, Workflow, eval_workflow
from .relstore import Relation, Store
from .sql_compiler import SqlScript, canonical_map_text, compile_workflow


class ApiError(Exception):
    """An engine error mapped to an HTTP status and a machine code."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


@dataclass
class AppContext:
    """Everything a request needs: the immutable store, indexes, workflows."""

    store: Store
    indexes: dict[str, SearchIndex]
    workflows: dict[str, Workflow]

    @classmethod
    def build(
        cls,
        snapshot_path: str | Path,
        specs_path: str | Path | None = None,
        workflows_dir: str | Path | None = None,
    ) -> "AppContext":
        store = relstore.snapshot_load(Path(snapshot_path).read_bytes())
        indexes: dict[str, SearchIndex] = {}
        if specs_path is not None:
            specs = entity_search.load_specs(Path(specs_path).read_text(encoding="utf-8"))
            for name, spec in specs.items():
                indexes[name] = entity_search.build_index(store, spec)
        workflows: dict[str, Workflow] = {}
        if workflows_dir is not None:
            for path in sorted(Path(workflows_dir).glob("*.frx")):
                result = workflow_dsl.parse(path.read_text(encoding="utf-8"))
                if not result.ok:
                    d = result.diagnostics[0]
                    raise ValueError(
                        f"{path.name}:{d.span.line}:{d.span.column}: {d.message}"
                    )
                wf = result.workflow
                if wf.name in workflows:
                    raise ValueError(f"{path.name}: duplicate workflow name {wf.name!r}")
                rec_algebra.validate_workflow(wf, store.schema)
                workflows[wf.name] = wf
        return cls(store, indexes, workflows)

    def index_for(self, entity: str | None) -> SearchIndex:
        if entity is None:
            if len(self.indexes) == 1:
                return next(iter(self.indexes.values()))
            raise ApiError(400, "MISSING_ENTITY", "an entity name is required")
        if entity not in self.indexes:
            raise ApiError(404, "UNKNOWN_ENTITY", f"unknown entity {entity!r}")
        return self.indexes[entity]

    def workflow_for(self, name: str) -> Workflow:
        if name not in self.workflows:
            raise ApiError(404, "UNKNOWN_WORKFLOW", f"unknown workflow {name!r}")
        return self.workflows[name]


# --- payload builders (shared with the CLI) --------------------------------


def search_payload(result: SearchResult) -> dict:
    return {
        "total": result.total,
        "hits": [
            {"id": hit.entity_id, "score": hit.score, "fields": list(hit.fields)}
            for hit in result.hits
        ],
    }


def cloud_payload(cloud: DataCloud) -> dict:
    return {
        "query": [entity_search.term_display(t) for t in cloud.query],
        "terms": [
            # Weights are fixed to two decimals at the API boundary only.
            {"term": t.term, "weight": jsonio.Raw(f"{t.weight:.2f}"), "count": t.count}
            for t in cloud.terms
        ],
    }


def workflows_payload(ctx: AppContext) -> dict:
    return {
        "workflows": [
            {
                "name": name,
                "params": [{"name": p.name, "type": p.type} for p in ctx.workflows[name].params],
            }
            for name in sorted(ctx.workflows)
        ]
    }


def _row_value(value):
    if isinstance(value, dict):
        return canonical_map_text(value)
    return value


def run_payload(relation: Relation) -> dict:
    return {
        "columns": list(relation.defn.column_names()),
        "rows": [[_row_value(v) for v in row] for row in relation.rows],
    }


def sql_payload(script: SqlScript) -> dict:
    return {
        "statements": list(script.statements),
        "temp_objects": list(script.temp_objects),
        "required_udfs": list(script.required_udfs),
    }


def error_payload(code: str, message: str) -> dict:
    return {"code": code, "message": message}


def render(payload: dict) -> bytes:
    """The one serialization both CLI and HTTP use: canonical JSON + newline."""
    return (jsonio.dumps(payload) + "\n").encode("utf-8")


# --- request handling -------------------------------------------------------


def map_error(exc: Exception) -> ApiError:
    if isinstance(exc, ApiError):
        return exc
    if isinstance(exc, StaleTerm):
        return ApiError(409, "STALE_TERM", str(exc))
    if isinstance(exc, EmptyQuery):
        return ApiError(400, "EMPTY_QUERY", str(exc))
    if isinstance(exc, QueryError):
        return ApiError(400, "BAD_QUERY", str(exc))
    if isinstance(exc, UnboundParam):
        return ApiError(400, "UNBOUND_PARAM", str(exc))
    if isinstance(exc, ValidationError):
        return ApiError(400, "VALIDATION", str(exc))
    if isinstance(exc, sql_compiler.UnsupportedDialect):
        return ApiError(400, "UNSUPPORTED_DIALECT", str(exc))
    return ApiError(500, "INTERNAL", f"{type(exc).__name__}: {exc}")


def run_workflow(ctx: AppContext, name: str, params: dict, top: int | None = None) -> Relation:
    wf = ctx.workflow_for(name)
    relation = eval_workflow(ctx.store, wf, params)
    if top is not None:
        relation = Relation(relation.defn, relation.rows[: max(top, 0)])
    return relation


def compile_named(ctx: AppContext, name: str, params: dict) -> SqlScript:
    wf = ctx.workflow_for(name)
    return compile_workflow(ctx.store.schema, wf, params)


def do_search(ctx: AppContext, q: str, entity: str | None, limit: int | None) -> dict:
    index = ctx.index_for(entity)
    return search_payload(search(index, parse_query(q), limit))


def do_cloud(ctx: AppContext, q: str, entity: str | None, k: int, click: str | None) -> dict:
    index = ctx.index_for(entity)
    terms = parse_query(q)
    if click is not None:
        _, cloud = refine(index, terms, click, k)
    else:
        cloud = compute_cloud(index, search(index, terms), k)
    return cloud_payload(cloud)


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


class ApiHandler(BaseHTTPRequestHandler):
    server_version = "flexcloud/0.1"
    protocol_version = "HTTP/1.1"

    @property
    def ctx(self) -> AppContext:
        return self.server.ctx  # type: ignore[attr-defined]

    def log_message(self, *args):  # keep test output quiet
        pass

    def _send(self, status: int, body: bytes, content_type: str = "application/json; charset=utf-8"):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, payload: dict):
        self._send(status, render(payload))

    def _fail(self, exc: Exception):
        err = map_error(exc)
        self._send_json(err.status, error_payload(err.code, err.message))

    def _query_params(self) -> dict[str, str]:
        raw = parse_qs(urlparse(self.path).query, keep_blank_values=True)
        return {k: v[0] for k, v in raw.items()}

    def _int_param(self, params: dict, name: str) -> int | None:
        if name not in params:
            return None
        try:
            return int(params[name])
        except ValueError:
            raise ApiError(400, "BAD_REQUEST", f"parameter {name!r} must be an integer") from None

    def do_GET(self):
        try:
            path = urlparse(self.path).path
            params = self._query_params()
            if path == "/v1/health":
                self._send_json(200, {"status": "ok"})
            elif path == "/v1/search":
                q = params.get("q", "")
                payload = do_search(self.ctx, q, params.get("entity"), self._int_param(params, "limit"))
                self._send_json(200, payload)
            elif path == "/v1/cloud":
                q = params.get("q", "")
                k = self._int_param(params, "k")
                payload = do_cloud(
                    self.ctx, q, params.get("entity"),
                    k if k is not None else data_cloud.DEFAULT_CLOUD_SIZE,
                    params.get("click"),
                )
                self._send_json(200, payload)
            elif path == "/v1/workflows":
                self._send_json(200, workflows_payload(self.ctx))
            elif self._try_static(path):
                pass
            else:
                raise ApiError(404, "NOT_FOUND", f"no such endpoint {path!r}")
        except Exception as exc:  # noqa: BLE001 - every error becomes an ApiError body
            self._fail(exc)

    def do_POST(self):
        try:
            path = urlparse(self.path).path
            parts = path.strip("/").split("/")
            if len(parts) == 4 and parts[0] == "v1" and parts[1] == "workflows":
                name, action = unquote(parts[2]), parts[3]
                body = self._read_body()
                params = body.get("params", {})
                if not isinstance(params, dict):
                    raise ApiError(400, "BAD_REQUEST", "'params' must be an object")
                if action == "run":
                    top = body.get("top")
                    if top is not None and (isinstance(top, bool) or not isinstance(top, int)):
                        raise ApiError(400, "BAD_REQUEST", "'top' must be an integer")
                    relation = run_workflow(self.ctx, name, params, top)
                    self._send_json(200, run_payload(relation))
                elif action == "sql":
                    self._send_json(200, sql_payload(compile_named(self.ctx, name, params)))
                else:
                    raise ApiError(404, "NOT_FOUND", f"no such action {action!r}")
            else:
                raise ApiError(404, "NOT_FOUND", f"no such endpoint {path!r}")
        except Exception as exc:  # noqa: BLE001
            self._fail(exc)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        try:
            body = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ApiError(400, "BAD_REQUEST", f"request body is not valid JSON: {exc}") from None
        if not isinstance(body, dict):
            raise ApiError(400, "BAD_REQUEST", "request body must be a JSON object")
        return body

    def _try_static(self, path: str) -> bool:
        ui_dir = getattr(self.server, "ui_dir", None)
        if ui_dir is None or path.startswith("/v1/"):
            return False
        name = path.lstrip("/") or "index.html"
        target = (Path(ui_dir) / name).resolve()
        if not str(target).startswith(str(Path(ui_dir).resolve())) or not target.is_file():
            return False
        content_type = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self._send(200, target.read_bytes(), content_type)
        return True


def make_server(ctx: AppContext, port: int, ui_dir: str | None = None) -> ThreadingHTTPServer:
    server = ThreadingHTTPServer(("127.0.0.1", port), ApiHandler)
    server.ctx = ctx  # type: ignore[attr-defined]
    server.ui_dir = ui_dir  # type: ignore[attr-defined]
    return server
