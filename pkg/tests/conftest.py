import numpy as np
import pytest

from slide_ising import CouplingMatrix, Dataset, exact_distribution, sample_exact

# acceptance lines collected by test_acceptance.py, echoed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def ln2_pair():
    return CouplingMatrix.from_edges(2, [(0, 1, np.log(2.0))])


def draw(J: CouplingMatrix, n: int, seed: int = 0) -> Dataset:
    return sample_exact(exact_distribution(J), n, seed)
