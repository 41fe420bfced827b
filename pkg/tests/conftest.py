import numpy as np
import pytest

from robust_subsample import Dataset, SeededRng

# lines reported by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return SeededRng(12345)


@pytest.fixture
def small_regression():
    gen = np.random.default_rng(0)
    x = gen.standard_normal((60, 4))
    beta = np.array([1.0, -2.0, 0.5, 0.0])
    y = x @ beta + 0.1 * gen.standard_normal(60)
    return Dataset(x, y, beta)
