import pytest

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record one acceptance line; returns the verdict so the test can assert on it."""

    def record(n, ok, text):
        _CRITERIA[n] = f"{'PASS' if ok else 'FAIL'} criterion {n}: {text}"
        print(_CRITERIA[n])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
