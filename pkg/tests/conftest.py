import pytest
from hypothesis import settings

from floquet_lockin import critical_load

settings.register_profile("default", deadline=None, max_examples=30)
settings.load_profile("default")


@pytest.fixture(scope="session")
def checkpoint_quasi():
    return critical_load(0.4, 0.42)


@pytest.fixture(scope="session")
def checkpoint_locked():
    return critical_load(0.4, 0.57)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
