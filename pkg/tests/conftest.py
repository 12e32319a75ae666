import numpy as np
import pytest

from delaymsf import build_star, jacobians_dsgc, jacobians_inverter, linearize


@pytest.fixture(scope="session")
def star():
    return build_star(3, 1.0, 8.0)


@pytest.fixture(scope="session")
def star_lin(star):
    return linearize(star)


@pytest.fixture(scope="session")
def inverter():
    return jacobians_inverter(0.1, 0.07)


@pytest.fixture(scope="session")
def dsgc():
    return jacobians_dsgc(0.1, 0.25)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
