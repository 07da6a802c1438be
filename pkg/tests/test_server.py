from __future__ import annotations

import json

import pytest
import requests

from checks import assert_valid_html
from sparqlgate.server import GatewayServer, serve


@pytest.fixture()
def live(gateway):
    server = serve(gateway, port=0)
    yield server, gateway
    server.stop()


# ---------------------------------------------------------------------------
# Page routes
# ---------------------------------------------------------------------------


def test_root_serves_the_dashboard(live):
    server, _ = live
    response = requests.get(server.url + "/")
    assert response.status_code == 200
    assert response.headers["Content-Type"] == "text/html; charset=utf-8"
    assert_valid_html(response.text)
    assert "API dashboard" in response.text


def test_api_base_serves_the_documentation(live):
    server, _ = live
    for path in ("/api/v1", "/api/v1/"):
        response = requests.get(server.url + path)
        assert response.status_code == 200
        assert "text/html" in response.headers["Content-Type"]
        assert "<h1>Citation Gateway</h1>" in response.text
        assert_valid_html(response.text)


def test_page_views_are_not_recorded_as_calls(live):
    server, manager = live
    requests.get(server.url + "/")
    requests.get(server.url + "/api/v1")
    assert manager.stats.snapshot()["global"]["total"] == 0


# ---------------------------------------------------------------------------
# Operation calls over HTTP
# ---------------------------------------------------------------------------


def test_get_operation_returns_json_body(live):
    server, _ = live
    response = requests.get(server.url + "/api/v1/citations/10.1108/jd-12-2013-0166")
    assert response.status_code == 200
    assert response.headers["Content-Type"] == "application/json; charset=utf-8"
    assert json.loads(response.text)[0]["citing"] == "10.3233/ds-190019"


def test_accept_header_switches_to_csv(live):
    server, _ = live
    response = requests.get(
        server.url + "/api/v1/citations/10.1108/jd-12-2013-0166",
        headers={"Accept": "text/csv"},
    )
    assert response.headers["Content-Type"] == "text/csv; charset=utf-8"
    assert response.text.startswith("citing,cited\n")


def test_format_refinement_beats_accept_over_http(live):
    server, _ = live
    response = requests.get(
        server.url + "/api/v1/citations/10.1108/jd-12-2013-0166?format=json",
        headers={"Accept": "text/csv"},
    )
    assert response.headers["Content-Type"] == "application/json; charset=utf-8"


def test_post_operation(live):
    server, _ = live
    response = requests.post(server.url + "/api/v1/stats/10.3233")
    assert response.status_code == 200
    assert json.loads(response.text)[1]["n"] == "10"


def test_encoded_slash_is_equivalent_to_a_literal_one(live):
    server, _ = live
    plain = requests.get(server.url + "/api/v1/citations/10.1108/jd-12-2013-0166")
    encoded = requests.get(server.url + "/api/v1/citations/10.1108%2Fjd-12-2013-0166")
    assert encoded.status_code == plain.status_code == 200
    assert encoded.text == plain.text


def test_error_statuses_and_bodies_over_http(live):
    server, _ = live
    missing = requests.get(server.url + "/api/v1/nothing")
    assert missing.status_code == 404
    assert json.loads(missing.text) == {
        "error": json.loads(missing.text)["error"], "status": 404,
    }
    wrong_verb = requests.post(server.url + "/api/v1/citations/10.1108/x")
    assert wrong_verb.status_code == 405
    bad_refinement = requests.get(server.url + "/api/v1/citations/10.1108/x?format=xml")
    assert bad_refinement.status_code == 400
    outside = requests.get(server.url + "/somewhere/else")
    assert outside.status_code == 404


# ---------------------------------------------------------------------------
# Statistics wiring
# ---------------------------------------------------------------------------


def test_calls_are_recorded_with_operation_attribution(live):
    server, manager = live
    requests.get(server.url + "/api/v1/citations/10.1108/a")
    requests.get(server.url + "/api/v1/citations/10.1108/b")
    requests.post(server.url + "/api/v1/citations/10.1108/c")  # 405, still attributed
    requests.get(server.url + "/api/v1/who-knows")  # 404, global only

    snap = manager.stats.snapshot()
    assert snap["global"]["total"] == 4
    assert snap["global"]["2xx"] == 2
    assert snap["global"]["4xx"] == 2
    citations = snap["operations"]["/api/v1/citations/{doi}"]
    assert citations["total"] == 3
    assert citations["2xx"] == 2
    assert citations["4xx"] == 1
    assert set(snap["operations"]) == {"/api/v1/citations/{doi}"}


def test_dashboard_shows_recorded_numbers(live):
    server, _ = live
    requests.get(server.url + "/api/v1/citations/10.1108/a")
    page = requests.get(server.url + "/").text
    all_calls = next(line for line in page.splitlines() if "All calls" in line)
    assert "<td>1</td><td>1</td><td>0</td><td>0</td>" in all_calls


# ---------------------------------------------------------------------------
# Lifecycle
# ---------------------------------------------------------------------------


def test_context_manager_binds_and_stops(gateway):
    with GatewayServer(gateway, port=0).start() as server:
        assert requests.get(server.url + "/").status_code == 200
        url = server.url
    with pytest.raises(requests.RequestException):
        requests.get(url + "/", timeout=0.5)


def test_two_servers_may_share_one_manager(gateway):
    with GatewayServer(gateway, port=0).start() as one:
        with GatewayServer(gateway, port=0).start() as two:
            assert one.url != two.url
            requests.get(one.url + "/api/v1/citations/10.1108/a")
            requests.get(two.url + "/api/v1/citations/10.1108/b")
    assert gateway.stats.snapshot()["global"]["total"] == 2
