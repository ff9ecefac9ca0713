import pytest

from lambdacpa.params import SystemParams


@pytest.fixture
def base():
    return SystemParams()


@pytest.fixture
def two_level():
    return SystemParams(omega1=0.0).two_level()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
