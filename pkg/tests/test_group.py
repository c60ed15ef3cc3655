import numpy as np
import pytest

from sparsetune.errors import DimensionMismatchError, DomainError
from sparsetune.estimators.group import (
    group_kkt_violation,
    group_objective,
    group_lasso_fit,
    group_lasso_path,
    group_null_threshold,
    default_group_weights,
)
from sparsetune.estimators.lasso import lasso_fit, null_threshold
from sparsetune.estimators.results import GroupStructure


def test_singleton_groups_reduce_to_the_lasso(small_instance):
    groups = GroupStructure.from_size(small_instance.p, 1)
    lam = 0.4 * null_threshold(small_instance)
    grouped = group_lasso_fit(small_instance, groups, [lam] * groups.M)
    plain = lasso_fit(small_instance, lam)
    np.testing.assert_allclose(grouped.beta, plain.beta, atol=1e-7)
    assert grouped.support == plain.support


def test_block_kkt_and_whole_groups(instance_factory):
    data, _ = instance_factory(40, 12, k=3, seed=4)
    groups = GroupStructure.from_size(12, 3)
    path = group_lasso_path(data, groups, size=15, ratio=0.05)
    weights = default_group_weights(groups)
    for lam, fit in zip(path.grid, path):
        assert group_kkt_violation(data, groups, fit.beta, lam * weights) < 1e-6
        active = set(groups.active_groups(fit.beta))
        assert set(fit.support) == set(groups.columns_of(active))


def test_null_threshold_is_tight(small_instance):
    groups = GroupStructure.from_size(small_instance.p, 2)
    w = default_group_weights(groups)
    lam_max = group_null_threshold(small_instance, groups, w)
    assert group_lasso_fit(small_instance, groups, 1.000001 * lam_max * w).size == 0
    assert group_lasso_fit(small_instance, groups, 0.9 * lam_max * w).size >= 2


def test_group_structures():
    groups = GroupStructure.from_labels(["b", "a", "b", "c", "a"])
    assert groups.groups == ((0, 2), (1, 4), (3,))
    assert groups.p == 5 and groups.M == 3
    with pytest.raises(DomainError):
        GroupStructure.from_size(10, 3)
    with pytest.raises(DomainError):
        GroupStructure(((0, 1), (1, 2)))


def test_penalty_vector_length(small_instance):
    groups = GroupStructure.from_size(small_instance.p, 5)
    with pytest.raises(DimensionMismatchError):
        group_lasso_fit(small_instance, groups, [1.0, 1.0, 1.0])
    with pytest.raises(DimensionMismatchError):
        group_lasso_fit(small_instance, GroupStructure.from_size(4, 2), [1.0, 1.0])


def test_solution_beats_perturbations(small_instance, rng):
    groups = GroupStructure.from_size(small_instance.p, 2)
    weights = default_group_weights(groups)
    lambdas = 0.3 * group_null_threshold(small_instance, groups, weights) * weights
    fit = group_lasso_fit(small_instance, groups, lambdas)
    best = group_objective(small_instance, groups, fit.beta, lambdas)
    for _ in range(20):
        other = fit.beta + 1e-3 * rng.standard_normal(small_instance.p)
        assert best <= group_objective(small_instance, groups, other, lambdas) + 1e-8
