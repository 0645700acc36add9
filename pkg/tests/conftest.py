import random
import re

import pytest

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: one acceptance criterion")


@pytest.fixture
def rng():
    return random.Random(20240611)


def pytest_runtest_logreport(report):
    m = re.search(r"test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2).replace("_", " "))
    if report.failed:
        _criteria[key] = "FAIL"
    elif report.when == "call":
        _criteria.setdefault(key, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for (n, title), outcome in sorted(_criteria.items()):
        terminalreporter.write_line(f"criterion {n:2d} {outcome}  {title}")
