import re
import time

SUITE_BUDGET_SECONDS = 30.0

_started = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    reports = [
        r
        for key in ("passed", "failed", "error")
        for r in terminalreporter.stats.get(key, [])
        if "test_acceptance.py::test_criterion_" in r.nodeid and r.when == "call"
    ]
    if not reports:
        return
    terminalreporter.section("acceptance criteria")
    for r in sorted(reports, key=lambda r: r.nodeid):
        match = re.search(r"test_criterion_(\d+)_(\w+)", r.nodeid)
        number, name = int(match.group(1)), match.group(2).replace("_", " ")
        status = "PASS" if r.passed else "FAIL"
        terminalreporter.write_line(f"{status}  criterion {number:2d}: {name}  ({r.duration:.2f} s)")
    elapsed = time.perf_counter() - _started
    status = "PASS" if elapsed < SUITE_BUDGET_SECONDS else "FAIL"
    terminalreporter.write_line(
        f"{status}  suite wall time {elapsed:.1f} s (budget {SUITE_BUDGET_SECONDS:.0f} s)"
    )


def pytest_sessionfinish(session, exitstatus):
    # criterion 10 bounds the wall time of a full run
    full_run = len({item.fspath for item in session.items}) > 1
    if full_run and time.perf_counter() - _started >= SUITE_BUDGET_SECONDS and exitstatus == 0:
        session.exitstatus = 1
