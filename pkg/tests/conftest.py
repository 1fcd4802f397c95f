import pytest

ACCEPTANCE = []


@pytest.fixture
def accept():
    """Record one acceptance verdict: ``accept(number, ok, detail)``."""
    def record(number, ok, detail):
        ACCEPTANCE.append((number, bool(ok), detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
