"""Shared pytest wiring for the acceptance report."""

import pytest

ACCEPTANCE_LINES: list = []


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for an acceptance test, then assert it.

    The lines are replayed in the terminal summary so they appear exactly
    once in captured runs as well.
    """

    def record(ok: bool, detail: str = ""):
        status = "PASS" if ok else "FAIL"
        line = f"[acceptance] {request.node.name}: {status}"
        if detail:
            line += f" ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
