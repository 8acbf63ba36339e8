#!/usr/bin/env python3
"""End-to-end walkthrough on the shipped fixtures.

Builds the store, runs a search, shows the term cloud, refines by click,
evaluates both shipped workflows, and prints the compiled SQL for one of
them. Run from the repository root:

    python scripts/demo.py
"""

from pathlib import Path
import sys

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from flexcloud import relstore  # noqa: E402
from flexcloud.data_cloud import compute_cloud, refine  # noqa: E402
from flexcloud.entity_search import build_index, load_specs, parse_query, search  # noqa: E402
from flexcloud.rec_algebra import eval_workflow  # noqa: E402
from flexcloud.sql_compiler import compile_workflow, script_text  # noqa: E402
from flexcloud.workflow_dsl import parse  # noqa: E402

FIXTURES = REPO / "fixtures"


def load_store():
    schema = relstore.load_schema((FIXTURES / "schema.json").read_text())
    data = {
        d.name: (FIXTURES / "data" / f"{d.name}.csv").read_bytes()
        for d in schema.relations
    }
    return relstore.build_store(schema, data)


def show_hits(store, result, limit=8):
    titles = {row[0]: row[2] for row in store.relations["Courses"].rows}
    for hit in result.hits[:limit]:
        print(f"  {hit.score:6.2f}  {titles[hit.entity_id]}  [{', '.join(hit.fields)}]")


def main():
    store = load_store()
    spec = load_specs((FIXTURES / "entities.json").read_text())["course"]
    index = build_index(store, spec)

    print("== search: american ==")
    query = parse_query("american")
    result = search(index, query)
    print(f"{result.total} matching courses")
    show_hits(store, result)

    cloud = compute_cloud(index, result, 12)
    print("\n== term cloud ==")
    for term in cloud.terms:
        print(f"  {term.weight:6.2f}  {term.term}  ({term.count} courses)")

    print("\n== click 'african american' ==")
    refined, _next_cloud = refine(index, query, "african american")
    print(f"narrowed to {refined.total} courses")
    show_hits(store, refined)

    workflows = {}
    for path in sorted((FIXTURES / "workflows").glob("*.frx")):
        parsed = parse(path.read_text())
        assert parsed.ok, parsed.diagnostics
        workflows[parsed.workflow.name] = parsed.workflow

    print("\n== workflow: similar_courses(year=2008, title='Introduction to Programming') ==")
    out = eval_workflow(store, workflows["similar_courses"],
                        {"year": 2008, "title": "Introduction to Programming"})
    for row in out.rows[:5]:
        print(f"  {row[-1]:6.3f}  {row[2]}")

    print("\n== workflow: cf_courses(target=444) ==")
    out = eval_workflow(store, workflows["cf_courses"], {"target": 444})
    for row in out.rows:
        print(f"  {row[-1]:6.3f}  {row[2]}")

    print("\n== compiled SQL for cf_courses ==")
    script = compile_workflow(store.schema, workflows["cf_courses"], {"target": 444})
    print(script_text(script))


if __name__ == "__main__":
    main()
