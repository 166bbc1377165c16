import numpy as np
import pytest

from catsim import _kernels

ACCEPTANCE_LINES: list[str] = []

BACKENDS = ["numpy"] + (["numba"] if _kernels.numba_available() else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def rs():
    return np.random.default_rng(20240611)


def random_density(rs, n, support=None):
    d = rs.dirichlet(np.ones(n * n)).reshape(n, n)
    if support is not None:
        mask = np.zeros(n * n, bool)
        mask[rs.choice(n * n, size=support, replace=False)] = True
        d = np.where(mask.reshape(n, n), d, 0.0)
    return d / d.sum()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
