"""Coordinatewise thresholding rules for identity designs: soft, hard and SCAD."""

from typing import Optional, Sequence, Union

import numpy as np

from sparsetune.core.dataset import Support
from sparsetune.errors import ConfigurationError, DomainError
from sparsetune.estimators.results import EstimatorPath, FitResult

SCAD_A = 3.0
KINDS = ("soft", "hard", "scad")


def scad_penalty(x: np.ndarray, lam: float, a: float = SCAD_A) -> np.ndarray:
    """p_lam(x) for x >= 0, the integral of lam 1{x<=lam} + (a lam - x)_+ 1{x>lam} / (a-1)."""
    x = np.asarray(x, dtype=float)
    middle = lam * lam + (a * lam * (x - lam) - (x * x - lam * lam) / 2.0) / (a - 1.0)
    return np.where(x <= lam, lam * x, np.where(x <= a * lam, middle, lam * lam * (a + 1.0) / 2.0))


def _scad(y: np.ndarray, lam: float, a: float) -> np.ndarray:
    """Exact minimizer of (y - b)^2 + p_lam(|b|) over the finite candidate set."""
    u = np.abs(y)
    inf = np.inf
    stationary_mid = (2.0 * (a - 1.0) * u - a * lam) / (2.0 * a - 3.0)
    # ascending in value so argmin ties go to the smaller magnitude
    candidates = np.stack(
        [
            np.zeros_like(u),
            np.clip(u - lam / 2.0, 0.0, lam),
            np.full_like(u, lam),
            stationary_mid,
            np.full_like(u, a * lam),
            u,
        ],
        axis=-1,
    )
    crit = (candidates - u[..., None]) ** 2 + scad_penalty(candidates, lam, a)
    valid_mid = (stationary_mid > lam) & (stationary_mid <= a * lam)
    crit[..., 3] = np.where(valid_mid, crit[..., 3], inf)
    crit[..., 5] = np.where(u > a * lam, crit[..., 5], inf)
    best = np.take_along_axis(candidates, np.argmin(crit, axis=-1)[..., None], axis=-1)[..., 0]
    return np.sign(y) * best


def threshold(kind: str, y: Union[float, np.ndarray], lam: float, a: float = SCAD_A) -> np.ndarray:
    """Vectorized thresholding of y at level lam.

    soft: the Lasso with identity design, sign(y)(|y| - lam/2)_+.
    hard: y 1{|y| >= lam}.
    scad: argmin_b (y - b)^2 + p_lam(|b|), a > 2.
    """
    y = np.asarray(y, dtype=float)
    if lam < 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    if kind == "soft":
        return np.sign(y) * np.maximum(np.abs(y) - lam / 2.0, 0.0)
    if kind == "hard":
        return np.where(np.abs(y) >= lam, y, 0.0)
    if kind == "scad":
        if a <= 2:
            raise DomainError(f"SCAD needs a > 2, got {a}")
        if lam == 0:
            return y.copy()
        return _scad(y, lam, a)
    raise ConfigurationError(f"Unknown threshold kind {kind!r}; expected one of {KINDS}")


def scalar_threshold(kind: str, y: float, lam: float, a: float = SCAD_A) -> float:
    return float(threshold(kind, np.asarray([y]), lam, a)[0])


def default_threshold_grid(kind: str, y: np.ndarray) -> np.ndarray:
    """Grid realizing every support size along the path.

    hard: one value above max |y| followed by the sorted |y|.
    soft and scad: 2 |y|_(k), since both vanish exactly when |y| <= lam/2.
    """
    mags = np.unique(np.abs(y))[::-1]
    mags = mags[mags > 0]
    if mags.size == 0:
        return np.array([1.0])
    if kind == "hard":
        return np.concatenate([[mags[0] * (1.0 + 1e-9) + 1e-300], mags])
    return 2.0 * mags


def threshold_path(
    kind: str, y: np.ndarray, grid: Optional[Sequence[float]] = None, a: float = SCAD_A
) -> EstimatorPath:
    """Thresholding estimators of the identity-design model Y = beta + noise along a grid."""
    y = np.asarray(y, dtype=float).reshape(-1)
    grid = default_threshold_grid(kind, y) if grid is None else np.asarray(grid, dtype=float)
    fits = []
    for lam in grid:
        beta = threshold(kind, y, float(lam), a)
        r = y - beta
        fits.append(FitResult(beta, Support.from_beta(beta), float(lam), float(r @ r)))
    return EstimatorPath(grid, tuple(fits), kind=kind)
