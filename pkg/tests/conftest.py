from __future__ import annotations

from pathlib import Path

import pytest

from hazarg.assembler import build_safety_case, coverage
from hazarg.fixtures import tdcs_config, tdcs_sources

GOLDEN = Path(__file__).parent / "golden"

# criterion id -> (description, passed); filled by tests marked ``acceptance``
ACCEPTANCE: dict[str, tuple[str, bool]] = {}


def pytest_configure(config: pytest.Config) -> None:
    config.addinivalue_line("markers", "acceptance(cid, text): one acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item: pytest.Item, call: pytest.CallInfo):  # type: ignore[no-untyped-def]
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    cid, text = marker.args
    previous = ACCEPTANCE.get(cid, (text, True))[1]
    ACCEPTANCE[cid] = (text, previous and report.passed)


def pytest_terminal_summary(terminalreporter, exitstatus, config):  # type: ignore[no-untyped-def]
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        text, ok = ACCEPTANCE[cid]
        terminalreporter.write_line(f"{cid} {'PASS' if ok else 'FAIL'} {text}")


@pytest.fixture(scope="session")
def tdcs():
    return tdcs_sources()


@pytest.fixture(scope="session")
def tdcs_case(tdcs):
    return build_safety_case(tdcs.trees, tdcs.fmea, tdcs.stpa, tdcs.countermeasures, tdcs_config())


@pytest.fixture(scope="session")
def tdcs_report(tdcs, tdcs_case):
    return coverage(tdcs_case, tdcs)
