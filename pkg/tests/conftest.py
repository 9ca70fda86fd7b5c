import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report_line(capsys):
    """Print one acceptance verdict line immediately and again in the run summary."""

    def emit(line: str) -> None:
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print(f"\n{line}")

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
