import numpy as np
import pytest

from holevolab.solvers import SolverOptions


@pytest.fixture
def fast():
    return SolverOptions(restarts=4, seed=7)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def bell():
    v = np.array([1, 0, 0, 1]) / np.sqrt(2)
    return np.outer(v, v)


def ket(*amps):
    v = np.asarray(amps, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())
