import pytest

_ACCEPTANCE = {}


@pytest.fixture
def acceptance(capsys):
    """``report(n, ok, text)`` prints one PASS/FAIL line for criterion ``n`` and asserts ``ok``."""

    def report(n, ok, text):
        line = f"acceptance {n}: {'PASS' if ok else 'FAIL'}  {text}"
        _ACCEPTANCE[n] = line
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
