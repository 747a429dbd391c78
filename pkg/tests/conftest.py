import numpy as np
import pytest

from edgeworth import (ChiSquare, Normal, Poisson, StatisticSpec, correlation_model,
                       ratio_model, zscore_model)

# filled by test_acceptance; echoed after the run so the per-criterion verdicts
# are visible even when output capture is on
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def exp1():
    return StatisticSpec("pearson", correlation_model(ChiSquare(1.0), ChiSquare(1.0)))


@pytest.fixture
def exp2():
    return StatisticSpec("pearson", correlation_model(Poisson(1.0), ChiSquare(1.0)))


@pytest.fixture
def ratio():
    return StatisticSpec("ratio-squares", ratio_model(ChiSquare(1.0), Poisson(1.0), Poisson(1.0)))


@pytest.fixture
def zscore():
    return StatisticSpec("zscore", zscore_model(), a=0.25)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
