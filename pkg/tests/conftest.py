import numpy as np
import pytest

from bsdverify.octonion import H3Matrix, Octonion

# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_octonion(rng, scale=1.0, real=False):
    c = rng.uniform(-1, 1, 8)
    if not real:
        c = c + 1j * rng.uniform(-1, 1, 8)
    return Octonion(scale * c)


def random_h3(rng, scale=1.0):
    alpha = rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3)
    off = rng.uniform(-1, 1, (3, 8)) + 1j * rng.uniform(-1, 1, (3, 8))
    return H3Matrix(scale * alpha, scale * off)
