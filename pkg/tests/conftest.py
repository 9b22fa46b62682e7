import pytest
from hypothesis import settings

from icgm.environment import Constant, Environment, Explicit, homogeneous

settings.register_profile("default", deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def homog():
    return homogeneous(0.5, 0.5, seed=7)


@pytest.fixture
def trap_env():
    """Column rates (1, 0.5, 1, 1, ...), row rates 1."""
    return Environment(Explicit([1.0, 0.5], 1.0), Constant(1.0), seed=3)


@pytest.fixture
def queue_env():
    """a = 0, service rates (1, 0.5, 1, 1, ...)."""
    return Environment(Constant(0.0), Explicit([1.0, 0.5], 1.0), seed=5)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
