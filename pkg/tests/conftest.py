import numpy as np
import pytest

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    n = dict(report.user_properties).get("criterion")
    if n is None:
        return
    ok = report.passed
    prev = _criteria.get(n, (True, []))
    names = prev[1] + ([] if ok else [report.nodeid.split("::")[-1]])
    _criteria[n] = (prev[0] and ok, names)


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties.append(("criterion", m.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        ok, failed = _criteria[n]
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}"
        if failed:
            line += f"  (failing: {', '.join(failed)})"
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
