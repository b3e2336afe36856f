import pytest

_ACCEPTANCE: list[tuple[str, str, str]] = []


@pytest.fixture
def record_criterion():
    """Log one acceptance line; the summary is printed at the end of the run."""

    def record(name: str, ok: bool | None, detail: str) -> None:
        status = "N/A " if ok is None else ("PASS" if ok else "FAIL")
        _ACCEPTANCE.append((status, name, detail))
        print(f"{status}  {name}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for status, name, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{status}  {name}: {detail}")
