import numpy as np
import pytest

from oracles import PARTIAL_DIAG, PARTIALLY_ORTH, TOTALLY_ORTH

_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    n, title = mark.args
    entry = _criteria.setdefault(n, {"title": title, "ok": True, "tests": 0})
    if rep.when == "call":
        entry["tests"] += 1
    if rep.failed:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        e = _criteria[n]
        status = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(f"AC{n:<2} {status}  {e['title']} ({e['tests']} test{'s' if e['tests'] != 1 else ''})")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def partial_diag():
    return PARTIAL_DIAG.copy()


@pytest.fixture
def partially_orth():
    return PARTIALLY_ORTH.copy()


@pytest.fixture
def totally_orth():
    return TOTALLY_ORTH.copy()
