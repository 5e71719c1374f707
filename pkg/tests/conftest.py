import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rlroute import fixtures  # noqa: E402
from rlroute.telemetry import load_telemetry  # noqa: E402
from rlroute.topology import load_topology  # noqa: E402


def _bundle(name):
    t = load_topology(fixtures.path(name))
    return (
        t,
        load_telemetry(fixtures.path(name, "telemetry_nominal.json"), t),
        load_telemetry(fixtures.path(name, "telemetry_degraded.json"), t),
    )


@pytest.fixture(scope="session")
def eight():
    """(topology, nominal snapshot, degraded snapshot) for the 8-node network."""
    return _bundle("eight_node")


@pytest.fixture(scope="session")
def tokyo():
    return _bundle("tokyo")


@pytest.fixture(scope="session")
def eight_topology(eight):
    return eight[0]


_ACCEPTANCE: list[tuple[str, str, str]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "acceptance" in report.keywords:
        doc = getattr(report, "criterion", None) or report.nodeid.split("::")[-1]
        _ACCEPTANCE.append((doc, report.outcome.upper(), f"{report.duration:.2f}s"))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for doc, outcome, duration in _ACCEPTANCE:
        verdict = "PASS" if outcome == "PASSED" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {doc}  ({duration})")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and marker.args:
        report.criterion = marker.args[0]
