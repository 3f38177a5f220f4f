import pytest

_lines: list[str] = []


@pytest.fixture
def criterion():
    """Call as ``criterion(n, name, passed, detail)``; prints one line and
    keeps it for the end-of-session summary."""
    def report(n, name, passed, detail=""):
        line = f"criterion {n} [{name}]: {'PASS' if passed else 'FAIL'}  {detail}".rstrip()
        print(line)
        _lines.append(line)
        return passed
    return report


def pytest_terminal_summary(terminalreporter):
    if _lines:
        terminalreporter.section("acceptance criteria")
        for line in _lines:
            terminalreporter.write_line(line)
