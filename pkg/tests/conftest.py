"""Shared fixtures plus the acceptance-criterion summary block.

Tests marked ``@pytest.mark.criterion(n, "label")`` are pooled per criterion
number and the terminal summary prints one verdict line for each, so a full
run ends with an at-a-glance acceptance table.
"""

import collections

import numpy as np
import pytest

_RESULTS = collections.defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(num, label): acceptance criterion this test contributes to",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when != "call":
        return
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.passed:
        status = "pass"
    elif rep.skipped:
        status = "xfail" if hasattr(rep, "wasxfail") else "skip"
    else:
        status = "fail"
    _RESULTS[(mark.args[0], mark.args[1])].append((item.nodeid, status))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for (num, label), entries in sorted(_RESULTS.items()):
        statuses = {s for _, s in entries}
        if "fail" in statuses:
            verdict = "FAIL"
        elif "xfail" in statuses:
            verdict = "FAIL (expected; documented unattainable as configured)"
        elif "skip" in statuses:
            verdict = "SKIP"
        else:
            verdict = "PASS"
        terminalreporter.write_line(f"criterion {num} [{label}]: {verdict}")


@pytest.fixture
def rng():
    return np.random.default_rng(20260822)
