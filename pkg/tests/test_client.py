from __future__ import annotations

import json

import pytest

from sparqlgate.client import ResultTable, dispatch, parse_results, substitute
from sparqlgate.errors import (
    EndpointStatusError,
    EndpointUnreachableError,
    ResultParseError,
)
from sparqlgate.testkit import (
    CITATION_ROWS,
    MockRule,
    results_json,
    start_mock,
)

# ---------------------------------------------------------------------------
# Template substitution
# ---------------------------------------------------------------------------


def test_substitution_is_a_verbatim_splice():
    template = "SELECT ?c WHERE { ?c cito:hasCitedEntity <https://doi.org/[[doi]]> }"
    out = substitute(template, {"doi": "10.1108/jd-12-2013-0166"})
    assert "<https://doi.org/10.1108/jd-12-2013-0166>" in out
    assert "[[" not in out


def test_substitution_without_slots_is_identity():
    assert substitute("SELECT * WHERE { ?s ?p ?o }", {}) == "SELECT * WHERE { ?s ?p ?o }"


def test_substituted_text_is_never_rescanned():
    # A value containing slot syntax must not expand a second time.
    out = substitute("x [[a]] y", {"a": "[[b]]", "b": "BOOM"})
    assert out == "x [[b]] y"


def test_one_binding_may_fill_many_slots():
    assert substitute("[[a]]/[[a]]", {"a": "v"}) == "v/v"


# ---------------------------------------------------------------------------
# Results parsing
# ---------------------------------------------------------------------------


def test_parse_results_preserves_header_and_row_order():
    body = results_json(("citing", "cited"), CITATION_ROWS)
    table = parse_results(body, field_types={"creation": "datetime"})
    assert table.header == ("citing", "cited")
    assert [r["citing"] for r in table.rows] == [
        "10.3233/ds-190019",
        "10.3233/sw-160224",
    ]
    assert table.types == {"citing": "str", "cited": "str"}


def test_unbound_variables_become_empty_cells():
    body = results_json(("a", "b"), [{"a": "1", "b": None}, {"a": None, "b": "2"}])
    table = parse_results(body)
    assert table.rows == [{"a": "1", "b": ""}, {"a": "", "b": "2"}]


def test_declared_types_attach_to_present_variables_only():
    body = results_json(("n",), [{"n": "5"}])
    table = parse_results(body, field_types={"n": "int", "ghost": "float"})
    assert table.types == {"n": "int"}
    assert table.type_of("n") == "int"
    assert table.type_of("anything-else") == "str"


def test_zero_solutions_keep_the_header():
    table = parse_results(results_json(("x", "y"), []))
    assert table.header == ("x", "y")
    assert table.rows == []


def test_malformed_results_documents_are_rejected():
    bad = (
        "not json",
        "{}",
        json.dumps({"head": {}, "results": {"bindings": []}}),
        json.dumps({"head": {"vars": ["x"]}, "results": {}}),
        json.dumps({"head": {"vars": "x"}, "results": {"bindings": []}}),
        json.dumps({"head": {"vars": ["x"]}, "results": {"bindings": [["x"]]}}),
        json.dumps({"head": {"vars": ["x"]}, "results": {"bindings": [{"x": {"type": "literal"}}]}}),
        json.dumps(["head", "results"]),
    )
    for body in bad:
        with pytest.raises(ResultParseError):
            parse_results(body)


def test_replaced_shares_header_and_types():
    table = ResultTable(("a",), {"a": "int"}, [{"a": "1"}])
    swapped = table.replaced([{"a": "2"}])
    assert swapped.header == table.header
    assert swapped.types == table.types
    assert swapped.rows == [{"a": "2"}]
    assert table.rows == [{"a": "1"}]


# ---------------------------------------------------------------------------
# Protocol dispatch (against the mock endpoint)
# ---------------------------------------------------------------------------


def test_dispatch_get_and_post_carry_the_query_unchanged():
    query = 'SELECT ?s WHERE { ?s ?p "x & y = z?" }'
    rules = [MockRule(query, results_json(("s",), [{"s": "ok"}]))]
    with start_mock(rules) as endpoint:
        for method in ("get", "post"):
            status, media, body = dispatch(endpoint.url, query, method)
            assert status == 200
            assert media.startswith("application/sparql-results+json")
            assert parse_results(body).rows == [{"s": "ok"}]
        assert endpoint.received == [query, query]


def test_dispatch_wraps_connection_failures():
    with pytest.raises(EndpointUnreachableError):
        dispatch("http://127.0.0.1:1/sparql", "SELECT 1", timeout=0.5)


def test_dispatch_surfaces_upstream_error_statuses():
    rules = [MockRule("boom", '{"error": "no"}', status=503)]
    with start_mock(rules) as endpoint:
        with pytest.raises(EndpointStatusError) as info:
            dispatch(endpoint.url, "boom")
    assert info.value.upstream_status == 503
    assert info.value.status == 500
