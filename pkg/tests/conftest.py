import os

import pytest

from cesc.parser import read_spec

FIXTURES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "fixtures")

CASE_STUDIES = ("ocp_simple_read", "ocp_burst_read", "amba_ahb")
ALL_SPECS = CASE_STUDIES + ("handshake", "multiclock_read", "req_grant_assert",
                            "write_or_read", "beat_loop", "ocp_phases")


def fixture_path(*parts: str) -> str:
    return os.path.join(FIXTURES, *parts)


def load_fixture(name: str):
    return read_spec(fixture_path(name + ".cesc"))


@pytest.fixture(params=ALL_SPECS)
def fixture_spec(request):
    return request.param, load_fixture(request.param)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
