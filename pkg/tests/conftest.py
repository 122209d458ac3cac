"""Shared test plumbing: per-criterion result lines in the final summary."""

import pytest

_CRITERION_LINES: list[str] = []


@pytest.fixture
def criterion_report():
    """Record one pass/fail line for an acceptance criterion.

    The line is printed in a dedicated terminal section after the run, so
    it stays visible regardless of output capturing.
    """

    def _record(number: int, ok: bool, details: str) -> None:
        status = "PASS" if ok else "FAIL"
        line = f"criterion {number:2d} {status}: {details}"
        _CRITERION_LINES.append(line)
        print(line)

    return _record


def pytest_terminal_summary(terminalreporter):
    if _CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERION_LINES):
            terminalreporter.write_line(line)
