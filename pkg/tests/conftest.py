import math

import numpy as np
import pytest

from ksnudge import make_grid


@pytest.fixture(scope="session")
def paper_grid():
    return make_grid(8192, 32 * math.pi)


@pytest.fixture(scope="session")
def grid():
    return make_grid(256, 32 * math.pi)


@pytest.fixture
def rng():
    return np.random.default_rng(20180417)


def single_mode(g, m, value):
    s = g.zeros()
    s[m] = value
    return s


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
