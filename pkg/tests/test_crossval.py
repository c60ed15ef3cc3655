import numpy as np
import pytest

from sparsetune.errors import ConfigurationError
from sparsetune.selection.crossval import (
    gauss_lasso_path_factory,
    holdout_select,
    lasso_path_factory,
    vfold_cv_select,
)

FACTORY = lasso_path_factory(size=10, ratio=0.05)


def _crits(report):
    return [row.crit for row in report.rows]


def test_seeded_folds_are_reproducible(small_instance):
    first = vfold_cv_select(FACTORY, small_instance, V=5, seed=3)
    second = vfold_cv_select(FACTORY, small_instance, V=5, seed=3)
    assert _crits(first) == _crits(second)
    assert first.chosen_index == second.chosen_index


def test_fold_labels_do_not_matter(small_instance):
    folds = [np.arange(k, 30, 3) for k in range(3)]
    forward = vfold_cv_select(FACTORY, small_instance, folds=folds)
    backward = vfold_cv_select(FACTORY, small_instance, folds=folds[::-1])
    assert _crits(forward) == _crits(backward)


def test_score_is_the_sum_of_held_out_errors(small_instance):
    folds = [np.arange(0, 15), np.arange(15, 30)]
    report = vfold_cv_select(FACTORY, small_instance, folds=folds)
    path = FACTORY(small_instance, None)
    l = 4
    total = 0.0
    for test in folds:
        train = np.setdiff1d(np.arange(30), test)
        sub = FACTORY(small_instance.subset(train), path.grid)
        r = small_instance.Y[test] - small_instance.X[test] @ sub[l].beta
        total += float(r @ r)
    assert report.rows[l].crit == pytest.approx(total)


def test_thread_pool_gives_the_same_scores(small_instance):
    serial = vfold_cv_select(FACTORY, small_instance, V=5, seed=8, max_workers=1)
    pooled = vfold_cv_select(FACTORY, small_instance, V=5, seed=8, max_workers=4)
    assert _crits(serial) == _crits(pooled)


def test_fold_validation(small_instance):
    with pytest.raises(ConfigurationError):
        vfold_cv_select(FACTORY, small_instance, V=5)
    with pytest.raises(ConfigurationError):
        vfold_cv_select(FACTORY, small_instance, V=1, seed=0)
    with pytest.raises(ConfigurationError):
        vfold_cv_select(FACTORY, small_instance, folds=[np.arange(29)])
    with pytest.raises(ConfigurationError):
        vfold_cv_select(FACTORY, small_instance, folds=[np.array([0, 30])])


def test_holdout(small_instance):
    report = holdout_select(FACTORY, small_instance, seed=1)
    again = holdout_select(FACTORY, small_instance, seed=1)
    assert _crits(report) == _crits(again)
    explicit = holdout_select(FACTORY, small_instance, test_index=np.arange(10))
    assert len(explicit.rows[0].components) == 1
    with pytest.raises(ConfigurationError):
        holdout_select(FACTORY, small_instance)


def test_gauss_lasso_factory(small_instance):
    factory = gauss_lasso_path_factory(size=8, ratio=0.05)
    report = vfold_cv_select(factory, small_instance, V=3, seed=0)
    assert report.extras["kind"] == "gauss-lasso"
