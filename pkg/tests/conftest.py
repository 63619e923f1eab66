"""Shared pytest hooks: the acceptance suite reports one line per criterion."""

import pytest

ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record a ``(passed, detail)`` outcome for the acceptance summary.

    Usage: ``criterion(number, title, passed, detail)``; the same call prints
    the line immediately so it also shows with ``-s``.
    """

    def record(number, title, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else "")
        ACCEPTANCE[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
