import numpy as np
import pytest

from circcoords.datasets import PointCloud

SQUARE = np.array([[-1.0, 0.5], [1.0, 0.5], [1.0, -0.5], [-1.0, -0.5]])

_criteria = {}


@pytest.fixture
def square():
    return PointCloud(SQUARE.copy())


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        prev = _criteria.get(num, (title, True, 0.0))
        ok = prev[1] and rep.outcome == "passed"
        _criteria[num] = (title, ok, prev[2] + rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        title, ok, secs = _criteria[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {title}  ({secs:.1f} s)")
