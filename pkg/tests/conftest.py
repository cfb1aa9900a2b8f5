import sys

import numpy as np
import pytest

from depapprox.measures import SignedMeasure

TOL_MICRO = 1e-12
TOL_INV = 1e-9


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_measure(rng, max_len=8, signed=True, lo_range=(-3, 4)):
    size = int(rng.integers(1, max_len + 1))
    w = rng.normal(size=size) if signed else rng.random(size) + 1e-3
    return SignedMeasure(int(rng.integers(*lo_range)), w)


def random_probability(rng, max_len=8, lo_range=(-3, 4)):
    m = random_measure(rng, max_len, signed=False, lo_range=lo_range)
    return SignedMeasure(m.offset, m.weights / m.weights.sum())


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
