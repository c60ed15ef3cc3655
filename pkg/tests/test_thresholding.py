import numpy as np
import pytest

from sparsetune.errors import ConfigurationError, DomainError
from sparsetune.estimators.thresholding import (
    default_threshold_grid,
    scad_penalty,
    scalar_threshold,
    threshold,
    threshold_path,
)


def test_soft_and_hard_rules():
    y = np.array([-3.0, -0.5, 0.2, 1.0, 4.0])
    np.testing.assert_allclose(threshold("soft", y, 2.0), [-2.0, 0.0, 0.0, 0.0, 3.0])
    np.testing.assert_allclose(threshold("hard", y, 1.0), [-3.0, 0.0, 0.0, 1.0, 4.0])


@pytest.mark.parametrize("y", [0.1, 0.6, 1.3, 2.2, 2.9, 3.4, 7.0, -2.5])
def test_scad_minimizes_its_criterion(y):
    lam = 1.0
    b = np.linspace(-10.0, 10.0, 400001)
    crit = (y - b) ** 2 + scad_penalty(np.abs(b), lam)
    chosen = scalar_threshold("scad", y, lam)
    value = (y - chosen) ** 2 + float(scad_penalty(abs(chosen), lam))
    assert value <= crit.min() + 1e-9


def test_scad_limits():
    assert scalar_threshold("scad", 0.4, 1.0) == 0.0
    assert scalar_threshold("scad", 8.0, 1.0) == 8.0
    assert scalar_threshold("scad", -8.0, 1.0) == -8.0


@pytest.mark.parametrize("kind, sizes", [("hard", range(0, 6)), ("soft", range(0, 5)), ("scad", range(0, 5))])
def test_default_grid_realizes_every_size(kind, sizes):
    y = np.array([0.3, -2.0, 1.1, 5.0, -0.7])
    path = threshold_path(kind, y)
    assert [fit.size for fit in path] == list(sizes)
    assert np.all(np.diff(default_threshold_grid(kind, y)) < 0)


def test_invalid_inputs():
    with pytest.raises(ConfigurationError):
        threshold("firm", np.ones(2), 1.0)
    with pytest.raises(DomainError):
        threshold("soft", np.ones(2), -1.0)
    with pytest.raises(DomainError):
        threshold("scad", np.ones(2), 1.0, a=1.5)
