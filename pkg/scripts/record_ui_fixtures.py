#!/usr/bin/env python3
"""Record API response fixtures for the frontend test suite.

Writes the exact bytes the HTTP service would return (the CLI and server
share one serializer) into frontend/tests/fixtures/, so UI tests replay
real responses without a running server.

    python scripts/record_ui_fixtures.py
"""

import json
from pathlib import Path
import sys

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))
sys.path.insert(0, str(REPO / "tests"))

from flexcloud import relstore  # noqa: E402
from flexcloud.service import (  # noqa: E402
    AppContext,
    cloud_payload,
    do_cloud,
    do_search,
    render,
    run_payload,
    run_workflow,
    workflows_payload,
)

FIXTURES = REPO / "fixtures"
OUT = REPO / "frontend" / "tests" / "fixtures"


def build_ctx() -> AppContext:
    schema = relstore.load_schema((FIXTURES / "schema.json").read_text())
    data = {
        d.name: (FIXTURES / "data" / f"{d.name}.csv").read_bytes()
        for d in schema.relations
    }
    store = relstore.build_store(schema, data)
    snapshot = OUT.parent / "_snapshot.jsonl"
    snapshot.parent.mkdir(parents=True, exist_ok=True)
    snapshot.write_bytes(relstore.snapshot_save(store))
    ctx = AppContext.build(
        snapshot,
        specs_path=FIXTURES / "entities.json",
        workflows_dir=FIXTURES / "workflows",
    )
    snapshot.unlink()
    return ctx


def main():
    ctx = build_ctx()
    OUT.mkdir(parents=True, exist_ok=True)
    recordings = {
        "search_american.json": render(do_search(ctx, "american", "course", None)),
        "cloud_american.json": render(do_cloud(ctx, "american", "course", 30, None)),
        "search_american_refined.json": render(
            do_search(ctx, 'american "african american"', "course", None)
        ),
        "cloud_american_refined.json": render(
            do_cloud(ctx, 'american "african american"', "course", 30, None)
        ),
        "workflows.json": render(workflows_payload(ctx)),
        "run_cf_courses_444.json": render(
            run_payload(run_workflow(ctx, "cf_courses", {"target": 444}))
        ),
    }
    for name, body in recordings.items():
        (OUT / name).write_bytes(body)
        print(f"wrote {OUT / name} ({len(body)} bytes)")
    index = {
        "requests": {
            "search_american.json": "/v1/search?q=american&entity=course",
            "cloud_american.json": "/v1/cloud?q=american&entity=course&k=30",
            "search_american_refined.json":
                "/v1/search?q=american+%22african+american%22&entity=course",
            "cloud_american_refined.json":
                "/v1/cloud?q=american+%22african+american%22&entity=course&k=30",
            "workflows.json": "/v1/workflows",
            "run_cf_courses_444.json": "/v1/workflows/cf_courses/run",
        }
    }
    (OUT / "index.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")
    print(f"wrote {OUT / 'index.json'}")


if __name__ == "__main__":
    main()
