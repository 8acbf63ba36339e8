import random
import string

from flexcloud.rec_algebra import Extend, Recommend, Similarity, Workflow, Ref
from flexcloud.workflow_dsl import format as format_workflow
from flexcloud.workflow_dsl import parse

import randgen
from conftest import FIXTURES

CF_SOURCE = (FIXTURES / "workflows" / "cf_courses.frx").read_text(encoding="utf-8")


def walk(node):
    yield node
    for attr in ("child", "source", "left", "right", "candidates", "reference"):
        sub = getattr(node, attr, None)
        if sub is not None:
            yield from walk(sub)


class TestParse:
    def test_cf_workflow_shape(self):
        result = parse(CF_SOURCE)
        assert result.ok, result.diagnostics
        wf = result.workflow
        assert wf.name == "cf_courses"
        assert [p.name for p in wf.params] == ["target"]
        nodes = [n for _name, node in wf.bindings for n in walk(node)]
        assert sum(isinstance(n, Recommend) for n in nodes) == 2
        assert sum(isinstance(n, Extend) for n in nodes) == 2
        sim = next(n for n in nodes if isinstance(n, Recommend) and isinstance(n.mode, Similarity))
        assert sim.mode.fn == "inv_euclidean"
        assert sim.top == 20

    def test_empty_source(self):
        result = parse("")
        assert not result.ok
        diagnostic = result.diagnostics[0]
        assert "expected 'workflow'" in diagnostic.message
        assert (diagnostic.span.line, diagnostic.span.column) == (1, 1)

    def test_unknown_aggregation_keyword(self):
        source = (
            "workflow w():\n"
            "  out = recommend Courses against Courses "
            "aggregate Rating match CourseID = CourseID agg median\n"
        )
        result = parse(source)
        assert not result.ok
        diagnostic = result.diagnostics[0]
        assert "max" in diagnostic.message and "mean" in diagnostic.message
        start = source.encode("utf-8").index(b"median")
        assert diagnostic.span.start == start
        assert diagnostic.span.end == start + len("median")

    def test_default_aggs_filled(self):
        result = parse(
            "workflow w():\n"
            "  a = recommend Courses against Courses compare Title ~ Title using jaccard\n"
            "  b = recommend Courses against Courses aggregate Rating match CourseID = CourseID\n"
        )
        assert result.ok
        (_, node_a), (_, node_b) = result.workflow.bindings
        assert node_a.agg == "max"
        assert node_b.agg == "mean"

    def test_comments_and_blank_lines(self):
        result = parse("# leading comment\nworkflow w():\n  # indented comment\n  out = Courses\n")
        assert result.ok
        assert result.workflow.bindings == (("out", Ref("Courses")),)

    def test_undeclared_param(self):
        result = parse("workflow w():\n  out = select Courses where CourseID = $missing\n")
        assert not result.ok
        assert "undeclared parameter" in result.diagnostics[0].message

    def test_duplicate_binding(self):
        result = parse("workflow w():\n  a = Courses\n  a = Students\n")
        assert not result.ok
        assert "duplicate binding" in result.diagnostics[0].message

    def test_never_partial(self):
        result = parse("workflow w():\n  a = Courses\n  b = select\n")
        assert result.workflow is None
        assert result.diagnostics

    def test_string_escapes(self):
        result = parse('workflow w():\n  out = select Courses where Title = "a \\"b\\" \\\\ c\\n"\n')
        assert result.ok
        literal = result.workflow.bindings[0][1].predicate[0].operand
        assert literal.value == 'a "b" \\ c\n'

    def test_unterminated_string(self):
        result = parse('workflow w():\n  out = select Courses where Title = "oops\n')
        assert not result.ok
        assert "unterminated string" in result.diagnostics[0].message

    def test_nested_expressions(self):
        result = parse(
            "workflow w():\n"
            "  out = recommend select Courses where Units >= 3 against "
            "project Courses on Title, CourseID compare Title ~ Title using jaccard top 5\n"
        )
        assert result.ok
        node = result.workflow.bindings[0][1]
        assert isinstance(node, Recommend)
        assert node.top == 5


class TestFormat:
    def test_identity_workflow(self):
        wf = Workflow("identity", (), (("out", Ref("Courses")),))
        assert format_workflow(wf) == "workflow identity():\n  out = Courses\n"

    def test_fixture_round_trips(self, fixture_workflows):
        for wf in fixture_workflows.values():
            again = parse(format_workflow(wf))
            assert again.ok, again.diagnostics
            assert again.workflow == wf


def test_round_trip_200_random_asts():
    rng = random.Random(1404)
    for _ in range(200):
        wf = randgen.random_ast(rng)
        text = format_workflow(wf)
        result = parse(text)
        assert result.ok, (text, result.diagnostics)
        assert result.workflow == wf


def _random_fuzz_string(rng):
    kind = rng.random()
    if kind < 0.3:
        alphabet = string.printable
    elif kind < 0.5:
        alphabet = 'workflow select where and $ ( ) : , = " recommend against top agg 0123456789.'
    elif kind < 0.8:
        return "".join(chr(rng.randint(0, 0x10FFFF)) for _ in range(rng.randint(0, 80))
                       if rng.random() < 0.9)
    else:
        return bytes(rng.randint(0, 255) for _ in range(rng.randint(0, 120))).decode(
            "latin-1"
        )
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 160)))


def test_fuzz_parse_never_crashes():
    rng = random.Random(86420)
    for _ in range(2500):
        text = _random_fuzz_string(rng)
        result = parse(text)
        if result.ok:
            assert not result.diagnostics
        else:
            assert result.workflow is None and result.diagnostics
            assert result.diagnostics[0].severity == "error"
            span = result.diagnostics[0].span
            assert 0 <= span.start <= span.end <= len(text.encode("utf-8", "surrogatepass"))


def test_fuzz_mutated_valid_sources():
    rng = random.Random(777)
    base = CF_SOURCE
    for _ in range(800):
        chars = list(base)
        for _ in range(rng.randint(1, 6)):
            op = rng.random()
            pos = rng.randrange(len(chars))
            if op < 0.4:
                chars[pos] = chr(rng.randint(32, 126))
            elif op < 0.7:
                del chars[pos]
            else:
                chars.insert(pos, rng.choice('"$()=~,:'))
        result = parse("".join(chars))
        assert result.ok or result.diagnostics
