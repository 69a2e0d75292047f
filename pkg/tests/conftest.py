import math

import pytest
from hypothesis import settings

from masw import io
from masw.model import LayeredEarthModel, VelocitySweep

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


def rayleigh_root(vs: float, vp: float) -> float:
    """Rayleigh velocity of a homogeneous halfspace by bisection.

    Root of (2 - x^2)^2 - 4 sqrt(1 - x^2) sqrt(1 - x^2 vs^2/vp^2), x = c/vs.
    """
    g = (vs / vp) ** 2

    def f(x):
        return (2 - x * x) ** 2 - 4 * math.sqrt(1 - x * x) * math.sqrt(1 - g * x * x)

    a, b = 0.5, 1.0 - 1e-12
    fa = f(a)
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = f(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b) * vs


@pytest.fixture(scope="session")
def ref_model():
    return io.reference_model()


@pytest.fixture(scope="session")
def ref_sweep():
    return io.reference_sweep()


@pytest.fixture(scope="session")
def variable40():
    return io.gen_variable(40)


@pytest.fixture(scope="session")
def uniform200():
    return io.gen_uniform(200, 238)


@pytest.fixture
def two_layer():
    return LayeredEarthModel(2, [2.0, 3.0], [1800, 1900, 2000], [300, 400, 500], [150, 200, 250])


@pytest.fixture
def small_sweep():
    return VelocitySweep(60.0, 330.0, 1.0)


#: (criterion, status, detail) rows filled in by test_acceptance.py.
ACCEPTANCE = []


def record(criterion: int, status: str, detail: str) -> None:
    line = f"[{status}] criterion {criterion}: {detail}"
    ACCEPTANCE.append((criterion, status, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, _, line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
