"""Shared pytest wiring: acceptance criteria report lines.

test_acceptance.py registers one line per criterion through
``record_criterion``; the hook below reprints them as a summary section at
the end of every run, so the pass/fail lines are visible without ``-s``.
"""

CRITERION_LINES: list[str] = []


def record_criterion(line: str) -> None:
    CRITERION_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in CRITERION_LINES:
        terminalreporter.write_line(line)
