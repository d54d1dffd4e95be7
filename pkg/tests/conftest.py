import sys

import numpy as np
import pytest

from shifthsic.statistic import SeriesPair


@pytest.fixture
def rng():
    return np.random.default_rng(20140101)


@pytest.fixture
def random_pair(rng):
    def make(n, dependent=False):
        x = rng.standard_normal(n)
        y = x ** 2 + 0.1 * rng.standard_normal(n) if dependent else rng.standard_normal(n)
        return SeriesPair(x, y)

    return make


def pytest_terminal_summary(terminalreporter):
    lines = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
