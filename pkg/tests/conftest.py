import pytest

_LINES = []


@pytest.fixture
def criterion():
    """Record a one-line verdict; lines are echoed in the terminal summary."""

    def record(num, passed, detail):
        line = f"criterion {num}: {'PASS' if passed else 'FAIL'}  {detail}"
        print(line)
        _LINES.append((num, line))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_LINES):
            terminalreporter.write_line(line)
