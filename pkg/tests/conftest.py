import pytest

_LINES = []


@pytest.fixture
def record():
    """Append one acceptance line; printed together at the end of the run."""
    def add(tag, ok, text):
        line = f"{tag} {'PASS' if ok else 'FAIL'}: {text}"
        _LINES.append(line)
        print(line)
        return ok
    return add


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
