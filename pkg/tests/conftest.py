from __future__ import annotations

import pytest

_RESULTS: dict[int, tuple[str, str, float | None]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    failed = report.failed
    if report.when == "call" or failed:
        prev = _RESULTS.get(number)
        if prev is None or prev[1] == "PASS":
            elapsed = getattr(item, "criterion_elapsed", None)
            _RESULTS[number] = (title, "FAIL" if failed else "PASS", elapsed)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, verdict, elapsed = _RESULTS[number]
        took = "" if elapsed is None else f" ({elapsed:.2f}s)"
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {title}{took}")
