import numpy as np
import pytest
from hypothesis import settings

from rbfcoreset import WeightedPointSet

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def random_ball(rng, n, d, radius=1.0):
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (radius * rng.random(n) ** (1.0 / d))[:, None]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_set(rng):
    X = random_ball(rng, 60, 2)
    w = rng.uniform(0.5, 2.0, 60)
    return WeightedPointSet(X, w)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
