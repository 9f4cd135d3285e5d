from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pomreal.specio import load_fixture  # noqa: E402

BIG = 10**8

# criterion number -> list of (test name, passed, note)
_CRITERIA: dict[int, list[tuple[str, bool, str]]] = {}


@pytest.fixture(scope="session")
def fixture_doc():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = load_fixture(name)
        return cache[name]

    return get


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.skipped and not hasattr(report, "wasxfail"):
        return  # not applicable, e.g. a fixture outside the criterion's premise
    if report.when == "call" or (report.when == "setup" and not report.passed):
        passed = report.passed and not hasattr(report, "wasxfail")
        note = ""
        if hasattr(report, "wasxfail"):
            note = report.wasxfail
        elif not passed:
            note = str(call.excinfo.value).splitlines()[0] if call.excinfo else "failed"
        _CRITERIA.setdefault(marker.args[0], []).append((item.name, passed, note))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        parts = _CRITERIA[number]
        ok = all(p for _, p, _ in parts)
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({sum(p for _, p, _ in parts)}/{len(parts)} checks)"
        terminalreporter.write_line(line)
        for name, p, note in parts:
            if not p:
                terminalreporter.write_line(f"    {name}: {note}")
