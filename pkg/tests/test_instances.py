import math

import numpy as np
import pytest

from sparsetune.errors import ConfigurationError
from sparsetune.simulation.instances import (
    IDENTITY,
    MAGNITUDE_GRID,
    TOEPLITZ,
    SimConfig,
    derived_seed,
    generate_instance,
    magnitude_grid,
)


def test_repetitions_are_reproducible_and_independent():
    config = SimConfig(n=20, p=30, k=3, seed=9)
    first, truth = generate_instance(config, 4)
    again, truth_again = generate_instance(config, 4)
    other, _ = generate_instance(config, 5)
    np.testing.assert_array_equal(first.X, again.X)
    np.testing.assert_array_equal(first.Y, again.Y)
    assert truth.support0 == truth_again.support0
    assert not np.array_equal(first.Y, other.Y)


def test_normalized_design_and_magnitude():
    config = SimConfig(n=25, p=40, k=4, magnitude=1.5, sigma=2.0)
    data, truth = generate_instance(config, 0)
    np.testing.assert_allclose(np.linalg.norm(data.X, axis=0), 1.0)
    assert len(truth.support0) == 4
    expected = 1.5 * 2.0 * math.sqrt(2 * math.log(40))
    np.testing.assert_allclose(np.abs(truth.beta0[truth.support0.as_array()]), expected)
    assert np.count_nonzero(truth.beta0) == 4


def test_identity_and_toeplitz_designs():
    data, _ = generate_instance(SimConfig(n=10, p=10, design=IDENTITY, k=2), 0)
    np.testing.assert_array_equal(data.X, np.eye(10))
    data, _ = generate_instance(SimConfig(n=200, p=6, design=TOEPLITZ, rho=0.8, normalize=False), 0)
    corr = np.corrcoef(data.X, rowvar=False)
    assert corr[0, 1] > 0.6 and abs(corr[0, 5]) < 0.55


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n": 10, "p": 10, "design": "banded"},
        {"n": 10, "p": 12, "design": IDENTITY},
        {"n": 10, "p": 5, "k": 6},
        {"n": 10, "p": 5, "design": TOEPLITZ, "rho": 1.0},
        {"n": 10, "p": 5, "sigma": 0.0},
        {"n": 1, "p": 5},
    ],
)
def test_invalid_settings(kwargs):
    with pytest.raises(ConfigurationError):
        SimConfig(**kwargs)


def test_settings_from_dict():
    config = SimConfig.from_dict({"n": 50, "p": 80, "k": 3})
    assert config.to_dict()["p"] == 80
    with pytest.raises(ConfigurationError):
        SimConfig.from_dict({"n": 50, "p": 80, "snr": 3})


def test_magnitude_grid():
    configs = magnitude_grid(SimConfig(n=20, p=20))
    assert [c.magnitude for c in configs] == list(MAGNITUDE_GRID)
    assert all(c.n == 20 for c in configs)


def test_derived_seeds():
    assert derived_seed(1, 2, 1) == derived_seed(1, 2, 1)
    assert derived_seed(1, 2, 1) != derived_seed(1, 2, 2)
    assert derived_seed(1, 2, 1) != derived_seed(1, 3, 1)
