"""Total-variation (fused-lasso) denoising ||Y - b||^2 + lam sum_j |b_{j+1} - b_j|.

Solutions come from the direct taut-string style algorithm of Condat, run on
the halved criterion 1/2 ||Y - b||^2 + (lam/2) TV(b), and are certified by
the running-sum conditions: with c = cumsum(Y - b), |c_j| <= lam/2 everywhere,
c_j = -(lam/2) sign(b_{j+1} - b_j) at every jump, and sum(Y - b) = 0.
"""

from typing import Optional, Sequence, Tuple

import numpy as np

from sparsetune.core.dataset import Dataset, Support
from sparsetune.errors import ConvergenceError, DomainError
from sparsetune.estimators.results import EstimatorPath, FitResult
from sparsetune.logger import debug
from sparsetune.segmentation.dp import check_signal
from sparsetune.settings import CERTIFICATE_TOL, PATH_GRID_RATIO, PATH_GRID_SIZE


def _condat(y: np.ndarray, lam: float) -> np.ndarray:
    """argmin_x 1/2 ||y - x||^2 + lam sum |x_{k+1} - x_k|."""
    n = y.size
    x = np.empty(n)
    k = k0 = kplus = kminus = 0
    umin, umax = lam, -lam
    vmin, vmax = y[0] - lam, y[0] + lam
    twolam = 2.0 * lam
    while True:
        while k == n - 1:
            if umin < 0.0:
                # vmin too high: negative jump
                x[k0 : kminus + 1] = vmin
                k0 = kminus + 1
                k = kminus = k0
                vmin = y[k]
                umin = lam
                umax = vmin + umin - vmax
            elif umax > 0.0:
                # vmax too low: positive jump
                x[k0 : kplus + 1] = vmax
                k0 = kplus + 1
                k = kplus = k0
                vmax = y[k]
                umax = -lam
                umin = vmax + umax - vmin
            else:
                vmin += umin / (k - k0 + 1)
                x[k0 : k + 1] = vmin
                return x
        umin += y[k + 1] - vmin
        if umin < -lam:
            x[k0 : kminus + 1] = vmin
            k0 = kminus + 1
            k = kplus = kminus = k0
            vmin = y[k]
            vmax = vmin + twolam
            umin, umax = lam, -lam
            continue
        umax += y[k + 1] - vmax
        if umax > lam:
            x[k0 : kplus + 1] = vmax
            k0 = kplus + 1
            k = kplus = kminus = k0
            vmax = y[k]
            vmin = vmax - twolam
            umin, umax = lam, -lam
            continue
        k += 1
        if umin >= lam:
            kminus = k
            vmin += (umin - lam) / (kminus - k0 + 1)
            umin = lam
        if umax <= -lam:
            kplus = k
            vmax += (umax + lam) / (kplus - k0 + 1)
            umax = -lam


def tv_objective(Y: Sequence[float], b: np.ndarray, lam: float) -> float:
    y = check_signal(Y)
    r = y - b
    return float(r @ r + lam * np.sum(np.abs(np.diff(b))))


def tv_lambda_max(Y: Sequence[float]) -> float:
    """Smallest lam whose solution is the constant mean(Y): 2 max_j |cumsum(Y - mean Y)_j|."""
    y = check_signal(Y)
    if y.size < 2:
        return 0.0
    return float(2.0 * np.max(np.abs(np.cumsum(y - np.mean(y))[:-1])))


def jump_positions(b: np.ndarray) -> Tuple[int, ...]:
    """Indices j >= 1 with b_j != b_{j-1}: the breakpoints of b."""
    return tuple((np.flatnonzero(np.diff(b) != 0) + 1).tolist())


def tv_certificate(Y: Sequence[float], b: np.ndarray, lam: float) -> float:
    """Largest violation of the running-sum optimality conditions."""
    y = check_signal(Y)
    half = 0.5 * lam
    c = np.cumsum(y - b)
    running = c[:-1]
    violation = abs(float(c[-1]))
    if running.size:
        violation = max(violation, float(np.max(np.abs(running))) - half)
        steps = np.diff(b)
        jumps = steps != 0
        if np.any(jumps):
            violation = max(
                violation, float(np.max(np.abs(running[jumps] + half * np.sign(steps[jumps]))))
            )
    return max(violation, 0.0)


def tv_solve(Y: Sequence[float], lam: float, tol: float = CERTIFICATE_TOL) -> np.ndarray:
    """Certified total-variation solution at lam."""
    y = check_signal(Y)
    if lam < 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    if lam == 0.0 or y.size == 1:
        return y.copy()
    b = _condat(y, 0.5 * lam)
    violation = tv_certificate(y, b, lam)
    scale = max(1.0, float(np.sum(np.abs(y))))
    if violation > tol * scale:
        raise ConvergenceError(
            f"Total-variation solution at lambda={lam:.6g} fails its certificate", violation
        )
    return b


def tv_lambda_grid(
    Y: Sequence[float], size: int = PATH_GRID_SIZE, ratio: float = PATH_GRID_RATIO
) -> np.ndarray:
    lam_max = tv_lambda_max(Y) or 1.0
    if size == 1:
        return np.array([lam_max])
    return lam_max * np.logspace(0.0, np.log10(ratio), size)


def tv_path(
    Y: Sequence[float],
    grid: Optional[Sequence[float]] = None,
    size: int = PATH_GRID_SIZE,
    ratio: float = PATH_GRID_RATIO,
) -> EstimatorPath:
    """TV solutions along a decreasing grid (default: from the null threshold down)."""
    y = check_signal(Y)
    if y.size < 2:
        raise DomainError("A total-variation path needs n >= 2")
    grid = tv_lambda_grid(y, size, ratio) if grid is None else np.asarray(grid, dtype=float)
    fits = []
    for lam in grid:
        b = tv_solve(y, float(lam))
        r = y - b
        fits.append(
            FitResult(
                beta=b,
                support=Support.from_beta(b),
                lam=float(lam),
                rss=float(r @ r),
                info={"breakpoints": list(jump_positions(b))},
            )
        )
    debug(f"TV path: {len(grid)} points, up to {len(fits[-1].info['breakpoints'])} breakpoint(s)")
    return EstimatorPath(grid, tuple(fits), kind="tv")


def segment_design(n: int) -> np.ndarray:
    """Lower-triangular ones: column j indicates positions i >= j."""
    return np.tril(np.ones((n, n)))


def to_segment_design(path: EstimatorPath, Y: Sequence[float]) -> Tuple[EstimatorPath, Dataset]:
    """Express every TV fit b as theta with b = A theta (theta_0 = b_0, theta_j = b_j - b_{j-1}).

    The support is the nonzero pattern of theta: the breakpoints, plus the
    intercept column whenever the first level is nonzero.
    """
    y = check_signal(Y)
    data = Dataset(segment_design(y.size), y)
    fits = []
    for fit in path:
        theta = np.concatenate(([fit.beta[0]], np.diff(fit.beta)))
        support = Support(tuple(np.flatnonzero(theta).tolist()))
        fits.append(FitResult(theta, support, fit.lam, fit.rss, info=dict(fit.info)))
    return EstimatorPath(path.grid, tuple(fits), kind="tv-segments"), data
