"""Square-root (scaled) Lasso and the l1-penalized Gaussian log-likelihood."""

import math
from typing import Optional, Tuple

import numpy as np

from sparsetune.core.dataset import Dataset
from sparsetune.errors import ConvergenceError, DegenerateFitError, DomainError
from sparsetune.estimators.lasso import Gram, solve_lasso
from sparsetune.estimators.results import FLAG_DEGENERATE, FitResult
from sparsetune.logger import debug
from sparsetune.settings import (
    ALTERNATION_TOL,
    CERTIFICATE_TOL,
    MAX_ALTERNATIONS,
    MAX_SWEEPS,
)

# sigma_hat below this fraction of ||Y||/sqrt(n) means Y was interpolated
COLLAPSE_RATIO = 1e-10
DIRECT_TOL = 1e-13


def default_sqrt_lambda(p: int) -> float:
    """Pivotal level 2 sqrt(2 log p) for unit-norm columns."""
    return 2.0 * math.sqrt(2.0 * math.log(p))


def _degenerate_zero_fit(data: Dataset, lam: float) -> FitResult:
    return FitResult.build(
        np.zeros(data.p), data, float(lam), sigma_hat=0.0, flags=(FLAG_DEGENERATE,)
    )


def _check_collapse(sigma: float, scale: float) -> None:
    if sigma < COLLAPSE_RATIO * scale:
        raise DegenerateFitError(
            f"Residual scale collapsed to {sigma:.3g}: the response is interpolated by the active set"
        )


def sqrt_lasso_step(
    data: Dataset, beta: np.ndarray, sigma: float, lam: float, gram: Optional[Gram] = None
) -> Tuple[np.ndarray, float]:
    """One alternation: beta <- Lasso(Y, 2 sigma lam), then sigma <- ||Y - X beta|| / sqrt(n)."""
    gram = gram or Gram.of(data)
    new_beta, _, _ = solve_lasso(gram, 2.0 * sigma * lam, warm_start=beta)
    r = data.Y - data.X @ new_beta
    return new_beta, float(np.linalg.norm(r) / math.sqrt(data.n))


def sqrt_lasso_fit(
    data: Dataset,
    lam: float,
    tol: float = ALTERNATION_TOL,
    max_alternations: int = MAX_ALTERNATIONS,
) -> FitResult:
    """Square-root Lasso by the scaled-Lasso alternation from sigma_0 = ||Y|| / sqrt(n).

    Stops when beta and sigma both move less than tol (relative to ||Y||/sqrt(n)).
    Y = 0 returns the zero fit flagged degenerate.
    """
    if lam <= 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    scale = float(np.linalg.norm(data.Y) / math.sqrt(data.n))
    if scale == 0.0:
        return _degenerate_zero_fit(data, lam)

    gram = Gram.of(data)
    beta = np.zeros(data.p)
    sigma = scale
    change = math.inf
    for it in range(1, max_alternations + 1):
        new_beta, new_sigma = sqrt_lasso_step(data, beta, sigma, lam, gram)
        _check_collapse(new_sigma, scale)
        change = max(float(np.max(np.abs(new_beta - beta), initial=0.0)), abs(new_sigma - sigma))
        beta, sigma = new_beta, new_sigma
        if change < tol * scale:
            debug(f"Scaled Lasso converged after {it} alternation(s), sigma_hat={sigma:.6g}")
            return FitResult.build(beta, data, float(lam), sigma_hat=sigma, alternations=it)
    raise ConvergenceError(
        f"Scaled Lasso alternation did not settle in {max_alternations} steps", change
    )


def sqrt_lasso_certificate(data: Dataset, fit: FitResult, lam: float) -> float:
    """Change in (beta, sigma) produced by one more alternation from the fit."""
    new_beta, new_sigma = sqrt_lasso_step(data, fit.beta, fit.sigma_hat, lam)
    return max(float(np.max(np.abs(new_beta - fit.beta), initial=0.0)), abs(new_sigma - fit.sigma_hat))


def sqrt_lasso_objective(data: Dataset, beta: np.ndarray, lam: float) -> float:
    """||Y - Xb|| + (lam / sqrt(n)) ||b||_1."""
    r = data.Y - data.X @ beta
    return float(np.linalg.norm(r) + lam / math.sqrt(data.n) * np.sum(np.abs(beta)))


def sqrt_lasso_direct(
    data: Dataset, lam: float, tol: float = DIRECT_TOL, max_sweeps: int = MAX_SWEEPS
) -> FitResult:
    """Coordinate descent on ||Y - Xb|| + (lam / sqrt(n)) ||b||_1 with exact coordinate steps.

    For a partial residual r and column x (a = ||x||^2, z = x^T r), the
    coordinate minimizer of ||r - x b|| + c|b| is 0 when |z| <= c ||r||, and
    otherwise z/a - sign(z) c sqrt((||r||^2 - z^2/a) / (a (a - c^2))).
    """
    if lam <= 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    scale = float(np.linalg.norm(data.Y) / math.sqrt(data.n))
    if scale == 0.0:
        return _degenerate_zero_fit(data, lam)

    X = data.X
    c = lam / math.sqrt(data.n)
    sq = np.sum(X * X, axis=0)
    beta = np.zeros(data.p)
    resid = data.Y.copy()
    for sweep in range(1, max_sweeps + 1):
        max_delta = 0.0
        for j in range(data.p):
            a = sq[j]
            if a == 0.0:
                continue
            x = X[:, j]
            r = resid + x * beta[j]
            z = float(x @ r)
            R2 = float(r @ r)
            if z * z <= c * c * R2:
                new = 0.0
            else:
                d = max(R2 - z * z / a, 0.0)
                new = z / a - math.copysign(c * math.sqrt(d / (a * (a - c * c))), z)
            delta = new - beta[j]
            if delta != 0.0:
                resid = r - x * new
                beta[j] = new
                max_delta = max(max_delta, abs(delta))
        if max_delta < tol * scale:
            sigma = float(np.linalg.norm(resid) / math.sqrt(data.n))
            _check_collapse(sigma, scale)
            return FitResult.build(beta, data, float(lam), sigma_hat=sigma, sweeps=sweep)
    raise ConvergenceError(
        f"Square-root Lasso descent did not converge in {max_sweeps} sweeps", max_delta
    )


def loglik_objective(data: Dataset, beta: np.ndarray, sigma: float, lam: float) -> float:
    """n log s + ||Y - Xb||^2 / (2 s^2) + lam ||b||_1 / s."""
    r = data.Y - data.X @ beta
    return float(
        data.n * math.log(sigma) + (r @ r) / (2.0 * sigma**2) + lam * np.sum(np.abs(beta)) / sigma
    )


def _rho_step(data: Dataset, phi: np.ndarray, y2: float) -> float:
    """Minimizer in rho of -n log rho + ||rho Y - X phi||^2 / 2."""
    b = float(data.Y @ (data.X @ phi))
    return (b + math.sqrt(b * b + 4.0 * data.n * y2)) / (2.0 * y2)


def loglik_certificate(data: Dataset, fit: FitResult, lam: float) -> float:
    """Stationarity violation in the convex (phi = beta/s, rho = 1/s) parametrization."""
    rho = 1.0 / fit.sigma_hat
    phi = fit.beta * rho
    r = rho * data.Y - data.X @ phi
    grad = data.X.T @ r
    active = phi != 0
    viol = 0.0
    if np.any(active):
        viol = float(np.max(np.abs(grad[active] - lam * np.sign(phi[active]))))
    if np.any(~active):
        viol = max(viol, float(np.max(np.abs(grad[~active]) - lam)))
    return max(viol, abs(-data.n / rho + float(data.Y @ r)))


def penalized_loglik_fit(
    data: Dataset,
    lam: float,
    tol: float = ALTERNATION_TOL,
    max_alternations: int = MAX_ALTERNATIONS,
) -> FitResult:
    """Joint minimizer of n log s + ||Y - Xb||^2/(2 s^2) + lam ||b||_1 / s.

    Blockwise minimization of the convex criterion
    -n log rho + ||rho Y - X phi||^2 / 2 + lam ||phi||_1: the phi step is the
    Lasso beta = Lasso(Y, 2 lam / rho) and the rho step is a closed-form root.
    """
    if lam <= 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    scale = float(np.linalg.norm(data.Y) / math.sqrt(data.n))
    if scale == 0.0:
        return _degenerate_zero_fit(data, lam)

    gram = Gram.of(data)
    y2 = float(data.Y @ data.Y)
    beta = np.zeros(data.p)
    rho = 1.0 / scale
    change = math.inf
    for it in range(1, max_alternations + 1):
        new_beta, _, _ = solve_lasso(gram, 2.0 * lam / rho, warm_start=beta)
        new_rho = _rho_step(data, new_beta * rho, y2)
        _check_collapse(1.0 / new_rho, scale)
        change = max(
            float(np.max(np.abs(new_beta - beta), initial=0.0)),
            abs(1.0 / new_rho - 1.0 / rho),
        )
        beta, rho = new_beta, new_rho
        if change < tol * scale:
            fit = FitResult.build(beta, data, float(lam), sigma_hat=1.0 / rho, alternations=it)
            violation = loglik_certificate(data, fit, lam)
            if violation < CERTIFICATE_TOL * max(1.0, math.sqrt(y2)):
                return fit
    raise ConvergenceError(
        f"Penalized log-likelihood alternation did not settle in {max_alternations} steps", change
    )
