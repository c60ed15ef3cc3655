"""Hold-out and V-fold cross-validation over a shared tuning grid."""

import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from sklearn.model_selection import KFold, ShuffleSplit

from sparsetune.core.dataset import Dataset
from sparsetune.errors import ConfigurationError
from sparsetune.estimators.lasso import lasso_path
from sparsetune.estimators.refit import gauss_lasso_path
from sparsetune.estimators.results import EstimatorPath
from sparsetune.logger import debug, info
from sparsetune.selection.report import CandidateRow, SelectionReport, argmin_candidate
from sparsetune.settings import PATH_GRID_RATIO, PATH_GRID_SIZE

# factory(data, grid) fits a path; grid=None lets it choose its own grid
PathFactory = Callable[[Dataset, Optional[np.ndarray]], EstimatorPath]

MAX_FOLD_WORKERS = 8


def lasso_path_factory(size: int = PATH_GRID_SIZE, ratio: float = PATH_GRID_RATIO) -> PathFactory:
    def factory(data: Dataset, grid: Optional[np.ndarray]) -> EstimatorPath:
        return lasso_path(data, grid, size=size, ratio=ratio)

    return factory


def gauss_lasso_path_factory(
    size: int = PATH_GRID_SIZE, ratio: float = PATH_GRID_RATIO
) -> PathFactory:
    def factory(data: Dataset, grid: Optional[np.ndarray]) -> EstimatorPath:
        return gauss_lasso_path(lasso_path(data, grid, size=size, ratio=ratio), data)

    return factory


def _resolve_fold_workers(max_workers: Optional[int], task_count: int) -> int:
    if max_workers is None:
        max_workers = min(MAX_FOLD_WORKERS, os.cpu_count() or 1)
    return max(1, min(max_workers, task_count))


def _check_folds(n: int, folds: Sequence[np.ndarray]) -> List[np.ndarray]:
    checked = []
    for test in folds:
        test = np.unique(np.asarray(test, dtype=int))
        if test.size == 0:
            raise ConfigurationError("A validation fold is empty")
        if test[0] < 0 or test[-1] >= n:
            raise ConfigurationError(f"Fold indices out of range for n={n}")
        if n - test.size < 2:
            raise ConfigurationError(
                f"A fold of size {test.size} leaves {n - test.size} training rows (need >= 2)"
            )
        checked.append(test)
    # canonical order, so relabeling the folds cannot change the summed score
    return sorted(checked, key=lambda t: (int(t[0]), t.size))


def _holdout_errors(
    factory: PathFactory, data: Dataset, grid: np.ndarray, test: np.ndarray
) -> np.ndarray:
    """Held-out squared prediction error of every grid point, trained on the complement of test."""
    train = np.setdiff1d(np.arange(data.n), test)
    path = factory(data.subset(train), grid)
    resid = data.Y[test][:, None] - data.X[test] @ path.coefficients()
    return np.sum(resid**2, axis=0)


def _score_folds(
    factory: PathFactory,
    data: Dataset,
    grid: np.ndarray,
    folds: List[np.ndarray],
    max_workers: Optional[int],
) -> List[np.ndarray]:
    worker_count = _resolve_fold_workers(max_workers, len(folds))
    if worker_count == 1:
        return [_holdout_errors(factory, data, grid, test) for test in folds]

    results: Dict[int, np.ndarray] = {}
    with ThreadPoolExecutor(max_workers=worker_count) as executor:
        futures = {
            executor.submit(_holdout_errors, factory, data, grid, test): k
            for k, test in enumerate(folds)
        }
        for future in as_completed(futures):
            results[futures[future]] = future.result()
    return [results[k] for k in range(len(folds))]


def _cv_report(
    method: str,
    path: EstimatorPath,
    fold_errors: List[np.ndarray],
    extras: Dict,
) -> SelectionReport:
    rows = []
    for l, fit in enumerate(path):
        components = {f"fold_{k}": float(err[l]) for k, err in enumerate(fold_errors)}
        rows.append(
            CandidateRow(
                lam=fit.lam,
                size=fit.size,
                crit=float(sum(components.values())),
                components=components,
            )
        )
    chosen = argmin_candidate([r.crit for r in rows], [r.size for r in rows])
    info(f"{method}: chose lambda={rows[chosen].lam} with |support|={rows[chosen].size}")
    return SelectionReport(
        method=method, rows=tuple(rows), chosen_index=chosen, extras=dict(extras, kind=path.kind)
    )


def vfold_cv_select(
    factory: PathFactory,
    data: Dataset,
    V: int = 10,
    seed: Optional[int] = None,
    folds: Optional[Sequence[np.ndarray]] = None,
    path: Optional[EstimatorPath] = None,
    max_workers: Optional[int] = 1,
) -> SelectionReport:
    """V-fold cross-validation of the path fitted on the full data.

    The score of a grid point is the sum over folds of the held-out squared
    error of the fit trained on the other folds at the same lambda. Folds come
    from a shuffled KFold seeded by `seed`, or are given explicitly as test
    index arrays.
    """
    if folds is None:
        if seed is None:
            raise ConfigurationError("V-fold cross-validation needs a seed")
        if not 2 <= V <= data.n:
            raise ConfigurationError(f"Need 2 <= V <= n, got V={V}, n={data.n}")
        splitter = KFold(n_splits=V, shuffle=True, random_state=seed)
        folds = [test for _, test in splitter.split(data.X)]
    folds = _check_folds(data.n, folds)
    path = path or factory(data, None)
    debug(f"Cross-validating {len(path)} grid points over {len(folds)} folds")
    errors = _score_folds(factory, data, path.grid, folds, max_workers)
    return _cv_report("cv", path, errors, {"folds": len(folds), "seed": seed})


def holdout_select(
    factory: PathFactory,
    data: Dataset,
    split_ratio: float = 0.5,
    seed: Optional[int] = None,
    test_index: Optional[np.ndarray] = None,
    path: Optional[EstimatorPath] = None,
) -> SelectionReport:
    """Single-split validation: train on one part, score on the held-out part."""
    if test_index is None:
        if seed is None:
            raise ConfigurationError("Hold-out selection needs a seed")
        if not 0 < split_ratio < 1:
            raise ConfigurationError(f"split_ratio must lie in (0, 1), got {split_ratio}")
        splitter = ShuffleSplit(n_splits=1, test_size=split_ratio, random_state=seed)
        _, test_index = next(splitter.split(data.X))
    (test,) = _check_folds(data.n, [test_index])
    path = path or factory(data, None)
    errors = [_holdout_errors(factory, data, path.grid, test)]
    return _cv_report("holdout", path, errors, {"split_ratio": split_ratio, "seed": seed})
