"""Least-squares refits on selected supports (Gauss-Lasso)."""

from typing import Dict, Iterable, Tuple

import numpy as np

from sparsetune.core.dataset import Dataset, Support
from sparsetune.errors import DomainError
from sparsetune.estimators.results import FLAG_RANK_DEFICIENT, EstimatorPath, FitResult
from sparsetune.logger import debug
from sparsetune.settings import RANK_TOL


def gauss_lasso_refit(
    data: Dataset, support: Iterable[int], lam: float = 0.0, tol: float = RANK_TOL
) -> FitResult:
    """Ordinary least squares restricted to the support columns.

    A rank-deficient X_J gets the minimum-norm solution, flagged.
    """
    idx = Support.from_indices(support, data.p).as_array()
    if idx.size > data.n:
        raise DomainError(f"Support of size {idx.size} exceeds n={data.n}")
    beta = np.zeros(data.p)
    flags: Tuple[str, ...] = ()
    if idx.size:
        coef, _, rank, _ = np.linalg.lstsq(data.X[:, idx], data.Y, rcond=tol)
        beta[idx] = coef
        if rank < idx.size:
            flags = (FLAG_RANK_DEFICIENT,)
            debug(f"Refit on {idx.size} columns has rank {rank}; using minimum-norm solution")
    return FitResult.build(beta, data, float(lam), flags=flags, refit_support=idx.tolist())


def gauss_lasso_path(path: EstimatorPath, data: Dataset) -> EstimatorPath:
    """Refit every point of a path on its own support."""
    cache: Dict[Tuple[int, ...], FitResult] = {}
    fits = []
    for lam, fit in zip(path.grid, path.fits):
        key = fit.support.indices
        if key not in cache:
            cache[key] = gauss_lasso_refit(data, key, float(lam))
        refit = cache[key]
        fits.append(
            FitResult(refit.beta, refit.support, float(lam), refit.rss, flags=refit.flags, info=refit.info)
        )
    return EstimatorPath(path.grid, tuple(fits), kind="gauss-lasso")
