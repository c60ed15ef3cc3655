"""Group Lasso ||Y - Xb||^2 + sum_k lam_k ||b^{G_k}||_2 by exact block coordinate descent."""

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import brentq

from sparsetune.core.dataset import Dataset
from sparsetune.errors import ConvergenceError, DimensionMismatchError, DomainError
from sparsetune.estimators.lasso import Gram
from sparsetune.estimators.results import EstimatorPath, FitResult, GroupStructure
from sparsetune.logger import debug
from sparsetune.settings import (
    KKT_TOL,
    LASSO_TOL,
    MAX_SWEEPS,
    PATH_GRID_RATIO,
    PATH_GRID_SIZE,
)


class _Block:
    """Eigendecomposition of X_G^T X_G for one group."""

    def __init__(self, idx: np.ndarray, G: np.ndarray):
        self.idx = idx
        self.A = G[np.ix_(idx, idx)]
        evals, evecs = eigh(self.A)
        self.evals = np.maximum(evals, 0.0)
        self.evecs = evecs

    def solve(self, z: np.ndarray, lam: float) -> np.ndarray:
        """argmin_b b^T A b - 2 z^T b + lam ||b||.

        Zero when ||2z|| <= lam; otherwise b = (A + mu I)^{-1} z where
        mu ||(A + mu I)^{-1} z|| = lam / 2.
        """
        znorm = float(np.linalg.norm(z))
        if 2.0 * znorm <= lam:
            return np.zeros_like(z)
        w = self.evecs.T @ z
        if lam == 0.0:
            inv = np.divide(1.0, self.evals, out=np.zeros_like(self.evals), where=self.evals > 0)
            return self.evecs @ (inv * w)
        half = 0.5 * lam

        def h(mu: float) -> float:
            if mu == 0.0:
                return -half
            return mu * math.sqrt(float(np.sum((w / (self.evals + mu)) ** 2))) - half

        hi = float(self.evals[-1]) * half / (znorm - half)
        hi = max(hi, 1e-300)
        while h(hi) < 0:
            hi *= 2.0
        mu = brentq(h, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
        return self.evecs @ (w / (self.evals + mu))


def group_objective(data: Dataset, groups: GroupStructure, beta: np.ndarray, lambdas: Sequence[float]) -> float:
    r = data.Y - data.X @ beta
    pen = sum(l * np.linalg.norm(beta[g]) for l, g in zip(lambdas, groups.blocks()))
    return float(r @ r + pen)


def _block_violation(grad: np.ndarray, beta: np.ndarray, lambdas: Sequence[float], blocks: Sequence[np.ndarray]) -> float:
    violation = 0.0
    for lam, g in zip(lambdas, blocks):
        b = beta[g]
        norm_b = float(np.linalg.norm(b))
        if norm_b > 0:
            violation = max(violation, float(np.linalg.norm(grad[g] - lam * b / norm_b)))
        else:
            violation = max(violation, float(np.linalg.norm(grad[g])) - lam)
    return max(violation, 0.0)


def group_kkt_violation(
    data: Dataset, groups: GroupStructure, beta: np.ndarray, lambdas: Sequence[float]
) -> float:
    """Largest block stationarity violation at beta."""
    grad = 2.0 * (data.X.T @ (data.Y - data.X @ beta))
    return _block_violation(grad, beta, lambdas, groups.blocks())


def _check_lambdas(groups: GroupStructure, lambdas: Sequence[float]) -> np.ndarray:
    lambdas = np.asarray(lambdas, dtype=float).reshape(-1)
    if lambdas.size != groups.M:
        raise DimensionMismatchError(f"Need {groups.M} group penalties, got {lambdas.size}")
    if np.any(lambdas < 0):
        raise DomainError("Group penalties must be nonnegative")
    return lambdas


def _solve_group_lasso(
    gram: Gram,
    blocks: List[_Block],
    lambdas: np.ndarray,
    warm_start: Optional[np.ndarray],
    tol: float,
    kkt_tol: float,
    max_sweeps: int,
) -> Tuple[np.ndarray, int, float]:
    G, c = gram.G, gram.c
    beta = np.zeros(c.shape[0]) if warm_start is None else np.asarray(warm_start, dtype=float).copy()
    g = c - G @ beta
    violation = math.inf
    for sweep in range(1, max_sweeps + 1):
        max_delta = 0.0
        for lam, block in zip(lambdas, blocks):
            idx = block.idx
            old = beta[idx]
            z = g[idx] + block.A @ old
            new = block.solve(z, lam)
            delta = new - old
            step = float(np.max(np.abs(delta), initial=0.0))
            if step > 0.0:
                g -= G[:, idx] @ delta
                beta[idx] = new
                max_delta = max(max_delta, step)
        if max_delta < tol:
            g = c - G @ beta
            violation = _block_violation(2.0 * g, beta, lambdas, [b.idx for b in blocks])
            if violation < kkt_tol:
                return beta, sweep, violation
    raise ConvergenceError(
        f"Group Lasso block descent did not converge in {max_sweeps} sweeps", violation
    )


def group_lasso_fit(
    data: Dataset,
    groups: GroupStructure,
    lambdas: Sequence[float],
    warm_start: Optional[np.ndarray] = None,
    gram: Optional[Gram] = None,
    tol: float = LASSO_TOL,
    kkt_tol: float = KKT_TOL,
    max_sweeps: int = MAX_SWEEPS,
) -> FitResult:
    """Group Lasso fit with one penalty per group, certified by the block KKT conditions."""
    if groups.p != data.p:
        raise DimensionMismatchError(f"Groups cover {groups.p} columns, data has {data.p}")
    lambdas = _check_lambdas(groups, lambdas)
    gram = gram or Gram.of(data)
    blocks = [_Block(idx, gram.G) for idx in groups.blocks()]
    beta, sweeps, violation = _solve_group_lasso(
        gram, blocks, lambdas, warm_start, tol, kkt_tol, max_sweeps
    )
    return FitResult.build(beta, data, tuple(float(l) for l in lambdas), sweeps=sweeps, kkt=violation)


def default_group_weights(groups: GroupStructure) -> np.ndarray:
    return np.sqrt(groups.sizes.astype(float))


def group_null_threshold(data: Dataset, groups: GroupStructure, weights: np.ndarray) -> float:
    """Smallest common lam with lam * w_k >= 2 ||X_Gk^T Y|| for every k."""
    c = data.X.T @ data.Y
    return float(max(2.0 * np.linalg.norm(c[g]) / w for g, w in zip(groups.blocks(), weights)))


def group_lasso_path(
    data: Dataset,
    groups: GroupStructure,
    grid: Optional[Sequence[float]] = None,
    weights: Optional[Sequence[float]] = None,
    size: int = PATH_GRID_SIZE,
    ratio: float = PATH_GRID_RATIO,
    **solver_options,
) -> EstimatorPath:
    """Warm-started path with lam_k = lam * w_k (w_k = sqrt(|G_k|) by default)."""
    w = default_group_weights(groups) if weights is None else np.asarray(weights, dtype=float)
    if grid is None:
        lam_max = group_null_threshold(data, groups, w) or 1.0
        grid = lam_max * (np.logspace(0.0, np.log10(ratio), size) if size > 1 else np.ones(1))
    grid = np.asarray(grid, dtype=float)
    gram = Gram.of(data)
    fits = []
    beta = None
    for lam in grid:
        fit = group_lasso_fit(data, groups, lam * w, warm_start=beta, gram=gram, **solver_options)
        fits.append(fit)
        beta = fit.beta
    debug(f"Group Lasso path: {len(grid)} points over {groups.M} groups")
    return EstimatorPath(grid, tuple(fits), kind="group-lasso")
