import math

import numpy as np
import pytest

from sparsetune.core.diagnostics import (
    MODERATE,
    ULTRA_HIGH,
    classify_regime,
    compatibility_constant,
    compute_kstar,
    diagnose,
    group_compatibility_constant,
    phi_star,
    restricted_eigenvalue,
    sparse_eigenvalues,
)
from sparsetune.errors import DomainError, UnsupportedSizeError


def test_kstar_worked_example():
    assert compute_kstar(50, 5000) == 3


@pytest.mark.parametrize("n,p", [(20, 10), (100, 1000), (500, 200)])
def test_kstar_is_the_last_admissible_k(n, p):
    k = compute_kstar(n, p)
    if k:
        assert 2 * k * math.log(p / k) <= n
    if k + 1 <= p / math.e:
        assert 2 * (k + 1) * math.log(p / (k + 1)) > n


def test_regime():
    assert classify_regime(50, 5000, 5) == ULTRA_HIGH
    assert classify_regime(1000, 100, 2) == MODERATE
    with pytest.raises(DomainError):
        classify_regime(10, 5, 0)


def test_sparse_eigenvalues_of_orthonormal_design(orthonormal_data):
    lo, hi = sparse_eigenvalues(orthonormal_data.X, 2)
    assert lo == pytest.approx(1.0)
    assert hi == pytest.approx(1.0)
    with pytest.raises(UnsupportedSizeError):
        sparse_eigenvalues(orthonormal_data.X, 4, max_size=3)


def test_restricted_eigenvalue():
    X = np.diag([1.0, 2.0, 3.0])
    assert restricted_eigenvalue(X, [0, 2]) == pytest.approx(9.0)
    assert restricted_eigenvalue(X, []) == 0.0


def test_compatibility_identity_and_duplicates():
    assert compatibility_constant(np.eye(4), 2.0, [0]).value == pytest.approx(1.0, abs=1e-6)
    x = np.array([1.0, 2.0, 0.5, -1.0])
    X = np.column_stack([x, x, np.eye(4)[:, 2]])
    assert compatibility_constant(X, 1.0, [0]).value == pytest.approx(0.0, abs=1e-3)


def test_diagnose_record(small_instance):
    report = diagnose(small_instance, k_max=2, T=[0], sparsity=2)
    payload = report.to_dict()
    assert payload["kstar"] == compute_kstar(30, 10)
    assert set(payload["phi_plus"]) == {"1", "2"}
    assert payload["kappa"]["value"] > 0
    assert payload["regime"] in (ULTRA_HIGH, MODERATE)


def test_phi_star_and_group_compatibility(orthonormal_data):
    assert phi_star(orthonormal_data.X, 2) == pytest.approx(1.0)
    result = group_compatibility_constant(np.eye(4), [[0], [1], [2, 3]], xi=2.0, s=1, restarts=2)
    assert result.value == pytest.approx(1.0, abs=1e-6)
    assert result.converged
