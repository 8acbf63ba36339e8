"""Command-line interface: ingest, search, run, compile, serve.

Exit codes: 0 success, 1 usage error, 2 data or validation error.
``--json`` output is byte-identical to the corresponding HTTP endpoint
body for the same logical request.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import data_cloud, entity_search, relstore, service, sql_compiler
from .service import ApiError, AppContext


class _Parser(argparse.ArgumentParser):
    """argparse reserves exit code 2 for usage; this CLI uses 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="flexcloud", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load schema + CSV directory into a snapshot")
    p.add_argument("--schema", default="schema.json")
    p.add_argument("--data", default="data", help="directory holding <Relation>.csv files")
    p.add_argument("--out", default="snapshot.jsonl")

    p = sub.add_parser("search", help="keyword search over an entity")
    p.add_argument("query", help="query text; quote phrases like '\"latin american\"'")
    p.add_argument("--entity", default=None)
    p.add_argument("--cloud", action="store_true", help="show the term cloud instead of plain hits")
    p.add_argument("--k", type=int, default=data_cloud.DEFAULT_CLOUD_SIZE)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.add_argument("--snapshot", default="snapshot.jsonl")
    p.add_argument("--specs", default="entities.json")

    p = sub.add_parser("run", help="evaluate a workflow")
    p.add_argument("workflow")
    p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--top", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.add_argument("--snapshot", default="snapshot.jsonl")
    p.add_argument("--workflows", default="workflows")

    p = sub.add_parser("compile", help="compile a workflow to a SQL script")
    p.add_argument("workflow")
    p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--emit", choices=["sql"], default="sql")
    p.add_argument("--out", default=None, help="write the .sql file here instead of stdout")
    p.add_argument("--json", action="store_true")
    p.add_argument("--snapshot", default="snapshot.jsonl")
    p.add_argument("--workflows", default="workflows")

    p = sub.add_parser("serve", help="serve the HTTP JSON API over a snapshot")
    p.add_argument("--snapshot", default="snapshot.jsonl")
    p.add_argument("--specs", default="entities.json")
    p.add_argument("--workflows", default="workflows")
    p.add_argument("--port", type=int, default=None, help="overrides FLEXCLOUD_PORT")
    p.add_argument("--ui", default=None, help="directory of static UI assets to serve at /")
    return parser


def _emit(text: str) -> None:
    sys.stdout.write(text)
    sys.stdout.flush()


def _coerce_params(wf, pairs: list[str]) -> dict:
    declared = {p.name: p.type for p in wf.params}
    out = {}
    for pair in pairs:
        name, sep, raw = pair.partition("=")
        if not sep:
            raise ValueError(f"--param expects NAME=VALUE, got {pair!r}")
        if name not in declared:
            raise ValueError(f"unknown parameter {name!r}")
        ptype = declared[name]
        try:
            out[name] = int(raw) if ptype == "int" else float(raw) if ptype == "float" else raw
        except ValueError:
            raise ValueError(f"parameter {name!r} expects {ptype}, got {raw!r}") from None
    return out


def _cmd_ingest(args) -> int:
    schema = relstore.load_schema(Path(args.schema).read_text(encoding="utf-8"))
    data_dir = Path(args.data)
    csv_data = {}
    for defn in schema.relations:
        path = data_dir / f"{defn.name}.csv"
        if not path.is_file():
            raise FileNotFoundError(f"missing CSV file for relation {defn.name!r}: {path}")
        csv_data[defn.name] = path.read_bytes()
    store = relstore.build_store(schema, csv_data)
    Path(args.out).write_bytes(relstore.snapshot_save(store))
    counts = ", ".join(f"{d.name}={len(store.relations[d.name].rows)}" for d in schema.relations)
    print(f"wrote {args.out} ({counts})", file=sys.stderr)
    return 0


def _cmd_search(args) -> int:
    ctx = AppContext.build(args.snapshot, specs_path=args.specs)
    if args.cloud:
        payload = service.do_cloud(ctx, args.query, args.entity, args.k, None)
        if args.json:
            _emit(service.render(payload).decode("utf-8"))
        else:
            for term in payload["terms"]:
                print(f"{term['term']}\t{term['weight'].text}\t{term['count']}")
        return 0
    payload = service.do_search(ctx, args.query, args.entity, args.limit)
    if args.json:
        _emit(service.render(payload).decode("utf-8"))
    else:
        print(f"total {payload['total']}")
        for hit in payload["hits"]:
            print(f"{hit['id']}\t{hit['score']!r}\t{','.join(hit['fields'])}")
    return 0


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _cmd_run(args) -> int:
    ctx = AppContext.build(args.snapshot, workflows_dir=args.workflows)
    wf = ctx.workflow_for(args.workflow)
    params = _coerce_params(wf, args.param)
    relation = service.run_workflow(ctx, args.workflow, params, args.top)
    payload = service.run_payload(relation)
    if args.json:
        _emit(service.render(payload).decode("utf-8"))
    else:
        print("\t".join(payload["columns"]))
        for row in payload["rows"]:
            print("\t".join(_format_cell(v) for v in row))
    return 0


def _cmd_compile(args) -> int:
    ctx = AppContext.build(args.snapshot, workflows_dir=args.workflows)
    wf = ctx.workflow_for(args.workflow)
    params = _coerce_params(wf, args.param)
    script = service.compile_named(ctx, args.workflow, params)
    if args.json:
        _emit(service.render(service.sql_payload(script)).decode("utf-8"))
        return 0
    text = sql_compiler.script_text(script)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out} ({len(script.statements)} statements)", file=sys.stderr)
    else:
        _emit(text)
    return 0


def _cmd_serve(args) -> int:
    ctx = AppContext.build(args.snapshot, specs_path=args.specs, workflows_dir=args.workflows)
    port = args.port
    if port is None:
        port = int(os.environ.get("FLEXCLOUD_PORT", "8080"))
    server = service.make_server(ctx, port, ui_dir=args.ui)
    host, bound_port = server.server_address[:2]
    print(f"serving on http://{host}:{bound_port}/ (ctrl-c to stop)", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "search": _cmd_search,
    "run": _cmd_run,
    "compile": _cmd_compile,
    "serve": _cmd_serve,
}

_DATA_ERRORS = (
    relstore.ParseError,
    relstore.SchemaError,
    relstore.CsvError,
    relstore.SnapshotError,
    entity_search.SpecError,
    entity_search.QueryError,
    data_cloud.StaleTerm,
    sql_compiler.MapTextError,
    sql_compiler.UnsupportedDialect,
    ValueError,
    OSError,
)


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ApiError as exc:
        print(f"flexcloud: error: [{exc.code}] {exc.message}", file=sys.stderr)
        return 2
    except _DATA_ERRORS as exc:
        print(f"flexcloud: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
