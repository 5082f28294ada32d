"""Per-criterion PASS/FAIL summary for the acceptance suite."""

from collections import defaultdict

import pytest

_results = defaultdict(list)
_titles = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    # the call phase decides the outcome; a failing setup counts too
    if report.when == "call" or (report.when == "setup" and report.failed):
        n, title = marker.args
        _titles[n] = title
        _results[n].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        status = "PASS" if all(_results[n]) else "FAIL"
        terminalreporter.write_line(f"criterion {n:>2}: {status}  {_titles[n]}")
