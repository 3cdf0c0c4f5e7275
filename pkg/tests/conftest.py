"""Collects acceptance outcomes and prints one line per criterion after the run."""
from collections import defaultdict

import pytest

_results = defaultdict(list)  # number -> [(title, passed, detail)]


@pytest.fixture
def detail(request):
    """Call ``detail("...")`` to attach a measured value to the acceptance line."""

    def add(text):
        request.node.user_properties.append(("detail", text))

    return add


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None:
            item.user_properties.append(("acceptance", mark.args))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "acceptance" not in props:
        return
    failed = report.failed
    if report.when == "call" or failed:
        number, title = props["acceptance"]
        details = [v for k, v in report.user_properties if k == "detail"]
        _results[number].append((title, report.passed and not failed, "; ".join(details)))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_results):
        rows = _results[number]
        ok = all(passed for _, passed, _ in rows)
        title = rows[0][0]
        info = " | ".join(d for _, _, d in rows if d)
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}" + (f"  ({info})" if info else ""))
