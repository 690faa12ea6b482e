import numpy as np
import pytest

import media

_RESULTS: list[str] = []


def record(cid: str, description: str, passed: bool, detail: str = "") -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] {cid} {description}"
    if detail:
        line += f" :: {detail}"
    _RESULTS.append(line)
    print(line)


@pytest.fixture
def criterion(request):
    """Record one acceptance line for the test's ``criterion`` marker, then assert it."""
    cid, description = request.node.get_closest_marker("criterion").args

    def check(passed, detail=""):
        record(cid, description, bool(passed), detail)
        assert passed, f"{cid} {description}: {detail}"
    return check


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(cid, description): acceptance criterion test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call" or not report.failed:
        return
    cid, description = mark.args
    # a crash before the check still yields one line for the criterion
    if not any(line.split()[1] == cid for line in _RESULTS):
        record(cid, description, False, f"error: {call.excinfo.typename}: {call.excinfo.value}")


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in _RESULTS:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def corpus():
    return media.desk_corpus()


@pytest.fixture(scope="session")
def head_clip():
    return media.talking_head(30)
