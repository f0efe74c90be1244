import numpy as np
import pytest

from rotlaplace.grid import hopf_so3_grid, s3_grid


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def grid2():
    return hopf_so3_grid(2)


@pytest.fixture(scope="session")
def grid3():
    return hopf_so3_grid(3)


@pytest.fixture(scope="session")
def s3grid2():
    return s3_grid(2)


@pytest.fixture(scope="session")
def s3grid3():
    return s3_grid(3)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
