import numpy as np
import pytest

from sparsetune.errors import DomainError
from sparsetune.estimators.lasso import lasso_path
from sparsetune.estimators.refit import gauss_lasso_refit
from sparsetune.estimators.results import GroupStructure
from sparsetune.selection.exhaustive import bgh_select_exhaustive
from sparsetune.selection.linselect import (
    build_collection_coordinate,
    build_collection_group,
    candidate_path,
    coordinate_size_bound,
    enumerate_coordinate_spaces,
    linselect_criterion,
    linselect_select,
    linselect_select_full,
)
from sparsetune.selection.report import FLAG_EMPTY_COLLECTION


def _projection(X, columns, v):
    coef, *_ = np.linalg.lstsq(X[:, list(columns)], v, rcond=None)
    return X[:, list(columns)] @ coef


def test_projection_candidates_recover_the_exhaustive_choice(instance_factory):
    data, _ = instance_factory(30, 10, k=2, seed=7)
    spaces = enumerate_coordinate_spaces(data, 3)
    fits = [gauss_lasso_refit(data, space.columns) for space in spaces]
    report = linselect_select(candidate_path(fits), spaces, data)
    exhaustive = bgh_select_exhaustive(data, max_size=3)
    assert report.chosen_space == exhaustive.chosen_space
    assert report.chosen.crit == pytest.approx(exhaustive.chosen.crit, rel=1e-9)


@pytest.mark.slow
def test_projection_candidates_agree_with_exhaustive_search_on_many_instances(instance_factory):
    for seed in range(50):
        data, _ = instance_factory(30, 10, k=2, seed=seed)
        spaces = enumerate_coordinate_spaces(data, 3)
        fits = [gauss_lasso_refit(data, space.columns) for space in spaces]
        report = linselect_select(candidate_path(fits), spaces, data)
        assert report.chosen_space == bgh_select_exhaustive(data, max_size=3).chosen_space, seed


def test_criterion_terms(small_instance):
    path = lasso_path(small_instance, size=10)
    fit = path[5]
    space = build_collection_coordinate(path, small_instance)[0]
    value, terms = linselect_criterion(fit, space, small_instance)
    f = small_instance.X @ fit.beta
    proj_f = _projection(small_instance.X, space.columns, f)
    proj_y = _projection(small_instance.X, space.columns, small_instance.Y)
    sigma2 = np.sum((small_instance.Y - proj_y) ** 2) / (small_instance.n - space.dim)
    assert terms["fit"] == pytest.approx(np.sum((small_instance.Y - proj_f) ** 2))
    assert terms["approximation"] == pytest.approx(0.5 * np.sum((f - proj_f) ** 2))
    assert terms["penalty"] == pytest.approx(space.pen * sigma2)
    assert value == pytest.approx(sum(terms.values()))


def test_each_fit_is_charged_its_best_space(small_instance):
    path = lasso_path(small_instance, size=12)
    spaces = build_collection_coordinate(path, small_instance)
    report = linselect_select(path, spaces, small_instance)
    for fit, row in zip(path, report.rows):
        best = min(linselect_criterion(fit, s, small_instance)[0] for s in spaces)
        assert row.crit == pytest.approx(best)
    assert report.chosen.crit == min(row.crit for row in report.rows)


def test_strong_signal_is_kept(instance_factory):
    data, _ = instance_factory(50, 20, k=2, seed=3)
    path = lasso_path(data, size=30, ratio=1e-2)
    report = linselect_select(path, build_collection_coordinate(path, data), data)
    assert {0, 1} <= set(path[report.chosen_index].support)


def test_collection_spaces_are_distinct_and_admissible(small_instance):
    path = lasso_path(small_instance, size=20)
    spaces = build_collection_coordinate(path, small_instance)
    supports = [s.columns.indices for s in spaces]
    assert len(supports) == len(set(supports))
    bound = coordinate_size_bound(small_instance.n, small_instance.p)
    assert all(1 <= len(s) <= bound for s in supports)


def test_empty_collection_falls_back_to_null_space(instance_factory):
    data, _ = instance_factory(10, 40, k=1, seed=2)
    path = lasso_path(data, size=8)
    spaces = build_collection_coordinate(path, data)
    assert spaces == ()
    report = linselect_select(path, spaces, data)
    assert FLAG_EMPTY_COLLECTION in report.flags
    assert report.extras["collection_size"] == 0
    assert report.sigma2 == pytest.approx(float(data.Y @ data.Y) / data.n)


def test_full_collection_is_at_least_as_good(small_instance):
    path = lasso_path(small_instance, size=15)
    along_path = linselect_select(path, build_collection_coordinate(path, small_instance), small_instance)
    full = linselect_select_full(path, small_instance)
    assert full.chosen.crit <= along_path.chosen.crit + 1e-9


def test_group_collection(instance_factory):
    data, _ = instance_factory(40, 12, k=3, seed=5)
    path = lasso_path(data, size=10)
    spaces = build_collection_group(path, GroupStructure.from_size(12, 3), data)
    for space in spaces:
        assert len(space.columns) == 3 * len(space.groups)
    with pytest.raises(DomainError):
        build_collection_group(path, GroupStructure.from_size(12, 12), data)


def test_collection_holds_only_supports_met_on_the_path(small_instance):
    path = lasso_path(small_instance, size=12)
    spaces = build_collection_coordinate(path, small_instance)
    met = {tuple(fit.support) for fit in path if fit.size}
    assert all(space.dim > 0 for space in spaces)
    assert {tuple(space.columns) for space in spaces} <= met
