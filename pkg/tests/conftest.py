import sys

import numpy as np
import pytest

from slhnet.ops import random_hermitian, random_unitary
from slhnet.slh import SLHTriple, StratonovichCoefficients, from_block


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_triple(rng, n=2, d=2, scale=1.0):
    S = from_block(random_unitary(n * d, rng), n)
    L = scale * (rng.normal(size=(n, d, d)) + 1j * rng.normal(size=(n, d, d)))
    return SLHTriple(S, L, random_hermitian(d, rng))


def random_coefficients(rng, n=2, d=2, scale=1.0):
    E = random_hermitian(n * d, rng, scale)
    Evec = rng.normal(size=(n, d, d)) + 1j * rng.normal(size=(n, d, d))
    return StratonovichCoefficients(from_block(E, n), Evec, random_hermitian(d, rng))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
