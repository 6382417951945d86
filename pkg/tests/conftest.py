import numpy as np
import pytest

from cohsync import linalg


@pytest.fixture(scope="session")
def benchmark_model():
    return linalg.triple_integrator()


@pytest.fixture(scope="session")
def benchmark_P(benchmark_model):
    # solved once per session; every consumer sees the same bits
    return linalg.solve_care(benchmark_model.A, benchmark_model.B).P


@pytest.fixture(scope="session")
def exact_P():
    # closed-form solution for the chain-of-three-integrators plant
    c = 1.0 + np.sqrt(2.0)
    return np.array([[c, c, 1.0], [c, 2.0 * c, c], [1.0, c, c]])
