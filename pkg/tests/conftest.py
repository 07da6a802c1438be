from __future__ import annotations

import pytest

import checks
from sparqlgate.manager import ApiManager
from sparqlgate.testkit import fixture_citations, fixture_file, start_mock


@pytest.fixture(scope="session")
def mock_endpoint():
    """One mock SPARQL endpoint shared by the whole run (rules are static)."""
    _, rules = fixture_citations()
    endpoint = start_mock(rules)
    yield endpoint
    endpoint.stop()


@pytest.fixture()
def conf_path(mock_endpoint, tmp_path) -> str:
    return fixture_file(tmp_path, mock_endpoint.url)


@pytest.fixture()
def gateway(conf_path) -> ApiManager:
    return ApiManager([conf_path])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if checks.ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in checks.ACCEPTANCE:
            terminalreporter.write_line(line)
