import pytest

_acceptance_lines = []


@pytest.fixture
def criterion():
    """Record one pass/fail line for an acceptance criterion, then assert."""

    def record(number, title, ok, detail=""):
        status = "PASS" if ok else "FAIL"
        _acceptance_lines.append(f"[{status}] criterion {number:>2}: {title} -- {detail}")
        assert ok, f"criterion {number} failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
