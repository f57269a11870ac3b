import numpy as np
import pytest

from selfaffine import HomogeneousIFS, bernoulli

PHI = (1 + 5 ** 0.5) / 2


@pytest.fixture
def golden():
    return bernoulli(PHI, (0.5, 0.5))


@pytest.fixture
def cantor():
    return HomogeneousIFS([3.0], [[0.0], [2.0]], [0.5, 0.5])


@pytest.fixture
def uniform():
    return bernoulli(2.0, (0.5, 0.5))


@pytest.fixture
def diag23():
    return HomogeneousIFS([2.0, 3.0], [[0, 0], [1, 1]], [0.5, 0.5])


@pytest.fixture
def panel(golden, cantor, diag23):
    return {"golden": golden, "cantor": cantor, "diag23": diag23}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance results, one (criterion, ok, detail) per criterion
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
