import numpy as np
import pytest

from sparsetune.core.dataset import Dataset


def make_instance(n, p, k=2, sigma=1.0, seed=0, magnitude=3.0):
    """Gaussian design with the first k coefficients equal to magnitude."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    beta0 = np.zeros(p)
    beta0[:k] = magnitude
    Y = X @ beta0 + sigma * rng.standard_normal(n)
    return Dataset(X, Y), beta0


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def instance_factory():
    return make_instance


@pytest.fixture
def small_instance():
    data, _ = make_instance(30, 10, seed=1)
    return data


@pytest.fixture
def orthonormal_data(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((20, 5)))
    return Dataset(Q, rng.standard_normal(20))
