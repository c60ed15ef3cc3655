"""Lasso by covariance coordinate descent, ||Y - Xb||^2 + lam ||b||_1.

All constants of the un-halved criterion live here: the KKT gradient is
2 X^T (Y - Xb), active coordinates satisfy 2 X_j^T r = lam sign(b_j),
inactive ones |2 X_j^T r| <= lam, the coordinatewise soft threshold is
lam / 2 and the null threshold is 2 ||X^T Y||_inf.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from sparsetune.core.dataset import Dataset
from sparsetune.errors import ConvergenceError, DomainError
from sparsetune.estimators.results import EstimatorPath, FitResult
from sparsetune.logger import debug
from sparsetune.settings import (
    KKT_TOL,
    LASSO_TOL,
    MAX_SWEEPS,
    PATH_GRID_RATIO,
    PATH_GRID_SIZE,
)

# first sweep tolerance, relative to the largest single-coordinate solution
COARSE_TOL = 1e-4


@dataclass(frozen=True, eq=False)
class Gram:
    """Cached X^T X and X^T Y shared by every fit on the same data."""

    G: np.ndarray
    c: np.ndarray

    @classmethod
    def of(cls, data: Dataset) -> "Gram":
        return cls(data.X.T @ data.X, data.X.T @ data.Y)


def soft_threshold(z: np.ndarray, t: float) -> np.ndarray:
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def null_threshold(data: Dataset) -> float:
    """Smallest lam whose Lasso solution is zero: 2 ||X^T Y||_inf."""
    return float(2.0 * np.max(np.abs(data.X.T @ data.Y)))


def lasso_objective(data: Dataset, beta: np.ndarray, lam: float) -> float:
    r = data.Y - data.X @ beta
    return float(r @ r + lam * np.sum(np.abs(beta)))


def _kkt_from_gradient(grad: np.ndarray, beta: np.ndarray, lam: float) -> float:
    active = beta != 0
    violation = 0.0
    if np.any(active):
        violation = float(np.max(np.abs(grad[active] - lam * np.sign(beta[active]))))
    if np.any(~active):
        violation = max(violation, float(np.max(np.abs(grad[~active]) - lam)))
    return max(violation, 0.0)


def lasso_kkt_violation(data: Dataset, beta: np.ndarray, lam: float) -> float:
    """Largest violation of the Lasso stationarity conditions at beta."""
    grad = 2.0 * (data.X.T @ (data.Y - data.X @ beta))
    return _kkt_from_gradient(grad, np.asarray(beta, dtype=float), lam)


def _polish(gram: Gram, beta: np.ndarray, lam: float) -> Optional[np.ndarray]:
    """Closed-form solution on the current active set and signs, if sign-consistent."""
    A = np.flatnonzero(beta)
    if A.size == 0:
        return None
    s = np.sign(beta[A])
    try:
        b = np.linalg.solve(gram.G[np.ix_(A, A)], gram.c[A] - 0.5 * lam * s)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.sign(b) == s):
        return None
    out = np.zeros_like(beta)
    out[A] = b
    return out


def _sweep_block(
    G_AA: np.ndarray,
    g_A: np.ndarray,
    b_A: np.ndarray,
    d_A: np.ndarray,
    half: float,
    tol: float,
    budget: int,
) -> Tuple[int, float]:
    """Cyclic sweeps over one block; updates g_A and b_A in place."""
    sweeps = 0
    max_delta = 0.0
    while sweeps < budget:
        max_delta = 0.0
        for k in range(b_A.size):
            old = b_A[k]
            z = g_A[k] + d_A[k] * old
            new = math.copysign(max(abs(z) - half, 0.0), z) / d_A[k]
            delta = new - old
            if delta != 0.0:
                g_A -= G_AA[k] * delta
                b_A[k] = new
                max_delta = max(max_delta, abs(delta))
        sweeps += 1
        if max_delta < tol:
            break
    return sweeps, max_delta


def solve_lasso(
    gram: Gram,
    lam: float,
    warm_start: Optional[np.ndarray] = None,
    tol: float = LASSO_TOL,
    kkt_tol: float = KKT_TOL,
    max_sweeps: int = MAX_SWEEPS,
) -> Tuple[np.ndarray, int, float]:
    """Raw solver on (G, c); returns (beta, sweeps, kkt violation).

    Sweeps run on the active block only, starting at a loose tolerance that
    is tightened toward tol whenever the closed-form polish on the current
    signs fails the KKT check.
    """
    if lam < 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    G, c = gram.G, gram.c
    p = c.shape[0]
    diag = np.diag(G).copy()
    usable = diag > 0
    half = 0.5 * lam
    beta = np.zeros(p) if warm_start is None else np.asarray(warm_start, dtype=float).copy()
    beta[~usable] = 0.0
    active = np.flatnonzero(beta)
    scale = float(np.max(np.abs(c) / np.where(usable, diag, np.inf), initial=1.0))
    sweep_tol = max(tol, COARSE_TOL * scale)
    sweeps = 0
    violation = np.inf

    while sweeps < max_sweeps:
        max_delta = 0.0
        if active.size:
            b_A = beta[active]
            g_A = c[active] - G[active] @ beta
            done, max_delta = _sweep_block(
                G[np.ix_(active, active)], g_A, b_A, diag[active], half, sweep_tol, max_sweeps - sweeps
            )
            sweeps += done
            beta[active] = b_A
        else:
            sweeps += 1

        polished = _polish(gram, beta, lam)
        if polished is not None:
            v_pol = _kkt_from_gradient(2.0 * (c - G @ polished), polished, lam)
            if v_pol < kkt_tol:
                return polished, sweeps, v_pol

        g = c - G @ beta
        violation = _kkt_from_gradient(2.0 * g, beta, lam)
        inactive = np.ones(p, dtype=bool)
        inactive[active] = False
        violators = np.flatnonzero(inactive & (2.0 * np.abs(g) > lam + kkt_tol) & usable)
        if violators.size:
            active = np.union1d(active, violators)
            continue
        if violation < kkt_tol:
            return beta, sweeps, violation
        sweep_tol = max(tol, 1e-2 * sweep_tol)

    raise ConvergenceError(
        f"Lasso coordinate descent did not converge in {max_sweeps} sweeps (lambda={lam:.6g})",
        violation,
    )


def lasso_fit(
    data: Dataset,
    lam: float,
    warm_start: Optional[np.ndarray] = None,
    gram: Optional[Gram] = None,
    **solver_options,
) -> FitResult:
    """Lasso solution at lam, carrying its KKT violation in info['kkt']."""
    gram = gram or Gram.of(data)
    beta, sweeps, violation = solve_lasso(gram, lam, warm_start, **solver_options)
    return FitResult.build(beta, data, float(lam), sweeps=sweeps, kkt=violation)


def lambda_grid(
    data: Dataset, size: int = PATH_GRID_SIZE, ratio: float = PATH_GRID_RATIO
) -> np.ndarray:
    """size log-spaced values from the null threshold down to ratio times it."""
    if size < 1 or not (0 < ratio < 1):
        raise DomainError(f"Need size >= 1 and 0 < ratio < 1, got {size}, {ratio}")
    lam_max = null_threshold(data)
    if lam_max == 0.0:
        lam_max = 1.0
    if size == 1:
        return np.array([lam_max])
    return lam_max * np.logspace(0.0, np.log10(ratio), size)


def lasso_path(
    data: Dataset,
    grid: Optional[Sequence[float]] = None,
    size: int = PATH_GRID_SIZE,
    ratio: float = PATH_GRID_RATIO,
    **solver_options,
) -> EstimatorPath:
    """Warm-started Lasso fits along a decreasing grid (default: lambda_grid)."""
    grid = lambda_grid(data, size, ratio) if grid is None else np.asarray(grid, dtype=float)
    gram = Gram.of(data)
    fits = []
    beta = None
    for lam in grid:
        fit = lasso_fit(data, float(lam), warm_start=beta, gram=gram, **solver_options)
        fits.append(fit)
        beta = fit.beta
    debug(
        f"Lasso path: {len(grid)} points, support sizes {fits[0].size}..{fits[-1].size}"
    )
    return EstimatorPath(grid, tuple(fits), kind="lasso")
