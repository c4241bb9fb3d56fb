import pytest

_LINES: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record a one-line verdict for an acceptance criterion."""

    def record(number: int, passed: bool, detail: str):
        _LINES[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
        print(_LINES[number])
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_LINES):
        terminalreporter.write_line(_LINES[k])
