import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
REPO_ROOT = TESTS_DIR.parent
FIXTURES = REPO_ROOT / "fixtures"

if str(TESTS_DIR) not in sys.path:
    sys.path.insert(0, str(TESTS_DIR))

from flexcloud import entity_search, relstore, workflow_dsl  # noqa: E402


def load_fixture_store() -> relstore.Store:
    schema = relstore.load_schema((FIXTURES / "schema.json").read_text(encoding="utf-8"))
    data = {
        defn.name: (FIXTURES / "data" / f"{defn.name}.csv").read_bytes()
        for defn in schema.relations
    }
    return relstore.build_store(schema, data)


@pytest.fixture(scope="session")
def fixture_store() -> relstore.Store:
    return load_fixture_store()


@pytest.fixture(scope="session")
def course_spec() -> entity_search.EntitySpec:
    specs = entity_search.load_specs((FIXTURES / "entities.json").read_text(encoding="utf-8"))
    return specs["course"]


@pytest.fixture(scope="session")
def course_index(fixture_store, course_spec) -> entity_search.SearchIndex:
    return entity_search.build_index(fixture_store, course_spec)


@pytest.fixture(scope="session")
def fixture_workflows() -> dict:
    workflows = {}
    for path in sorted((FIXTURES / "workflows").glob("*.frx")):
        result = workflow_dsl.parse(path.read_text(encoding="utf-8"))
        assert result.ok, result.diagnostics
        workflows[result.workflow.name] = result.workflow
    return workflows


@pytest.fixture(scope="session")
def fixture_snapshot(tmp_path_factory, fixture_store) -> Path:
    path = tmp_path_factory.mktemp("snapshot") / "fixture.jsonl"
    path.write_bytes(relstore.snapshot_save(fixture_store))
    return path
