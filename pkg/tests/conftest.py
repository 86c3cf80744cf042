import numpy as np
import pytest

from sparse_ou.simulate import SufficientStats

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def scalar_stats():
    """d = 1 fixture: C_hat = 1, S = -1."""
    return SufficientStats(c_hat=[[1.0]], s_hat=[[-1.0]], t_horizon=1.0)


def random_spd(rng, d, jitter=0.1):
    m = rng.standard_normal((d, d))
    return m @ m.T / d + jitter * np.eye(d)


def random_stats(rng, d, scale=1.0):
    return SufficientStats(
        c_hat=random_spd(rng, d), s_hat=scale * rng.standard_normal((d, d)), t_horizon=1.0
    )
