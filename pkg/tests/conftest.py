import math

import numpy as np
import pytest

from edlab import VonNeumannAlgebra
from edlab import operator_core as oc

SX, SY, SZ, I2 = oc.PAULI_X, oc.PAULI_Y, oc.PAULI_Z, oc.PAULI_I
SINGLET = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)


def random_hermitian(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (g + g.conj().T) / 2


def random_density(rng, n, rank=None):
    r = rank or n
    g = rng.normal(size=(n, r)) + 1j * rng.normal(size=(n, r))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def m2():
    return VonNeumannAlgebra.full(2)


@pytest.fixture
def m4():
    return VonNeumannAlgebra.full(4)


@pytest.fixture
def m2_in_m4():
    """``M_2 (x) 1`` acting on ``C^2 (x) C^2``."""
    return VonNeumannAlgebra([(2, 2)])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
