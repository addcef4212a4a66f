import numpy as np
import pytest

_RESULTS = pytest.StashKey[dict]()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion check")
    config.stash[_RESULTS] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    results = item.config.stash[_RESULTS]
    if report.when == "call" or report.failed:
        if report.failed:
            results[number] = ("FAIL", title)
        elif hasattr(report, "wasxfail"):
            results[number] = ("XFAIL", title)
        elif report.passed:
            results.setdefault(number, ("PASS", title))


def pytest_terminal_summary(terminalreporter):
    results = terminalreporter.config.stash[_RESULTS]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        status, title = results[number]
        terminalreporter.write_line(f"{status} criterion {number:2d}: {title}")
