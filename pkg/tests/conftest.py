import numpy as np
import pytest

from apmm import collision as col
from apmm.velocity import VelocityGrid

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def grid():
    return VelocityGrid(5.0, 10)


@pytest.fixture(scope="session")
def L(grid):
    return col.bgk(grid)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
