"""Design diagnostics: sparse eigenvalues, compatibility constants and the k* regime rule."""

import math
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import brentq

from sparsetune.core.dataset import Dataset
from sparsetune.errors import DomainError, UnsupportedSizeError
from sparsetune.logger import debug, warning
from sparsetune.settings import MAX_ENUMERATION

COMPAT_MAX_ITER = 20000
COMPAT_TOL = 1e-10
GROUP_COMPAT_RESTARTS = 8

ULTRA_HIGH = "ultra-high-dimensional"
MODERATE = "moderate"


@dataclass(frozen=True)
class CompatibilityResult:
    """Best value found by the cone minimization (an upper bound on the true minimum)."""

    value: float
    converged: bool
    argmin: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def to_dict(self) -> Dict[str, Any]:
        return {"value": self.value, "converged": self.converged}


@dataclass
class DesignDiagnostics:
    n: int
    p: int
    phi_minus: Dict[int, float]
    phi_plus: Dict[int, float]
    phi_star: Optional[float]
    kstar: int
    kappa: Optional[CompatibilityResult] = None
    kappa_G: Optional[CompatibilityResult] = None
    regime: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "p": self.p,
            "phi_minus": {str(k): v for k, v in self.phi_minus.items()},
            "phi_plus": {str(k): v for k, v in self.phi_plus.items()},
            "phi_star": self.phi_star,
            "kstar": self.kstar,
            "kappa": self.kappa.to_dict() if self.kappa else None,
            "kappa_G": self.kappa_G.to_dict() if self.kappa_G else None,
            "regime": self.regime,
        }


def _check_enumeration(size: int, max_size: int, what: str) -> None:
    if size < 1:
        raise DomainError(f"{what} must be >= 1, got {size}")
    if size > max_size:
        raise UnsupportedSizeError(
            f"{what}={size} exceeds the enumeration cap {max_size}"
        )


def sparse_eigenvalues(
    X: np.ndarray, k: int, max_size: int = MAX_ENUMERATION
) -> Tuple[float, float]:
    """(phi_minus, phi_plus): extreme Rayleigh quotients over k-sparse vectors.

    Eigenvalues of principal submatrices interlace, so scanning supports of
    size exactly min(k, p) covers every support of size <= k.
    """
    _check_enumeration(k, max_size, "k")
    X = np.asarray(X, dtype=float)
    G = X.T @ X
    size = min(k, G.shape[0])
    lo, hi = math.inf, -math.inf
    for J in combinations(range(G.shape[0]), size):
        idx = np.asarray(J)
        eig = eigh(G[np.ix_(idx, idx)], eigvals_only=True)
        lo = min(lo, float(eig[0]))
        hi = max(hi, float(eig[-1]))
    return lo, hi


def restricted_eigenvalue(X: np.ndarray, columns: Sequence[int]) -> float:
    """Largest eigenvalue of X_J^T X_J (0 for an empty J)."""
    idx = np.asarray(list(columns), dtype=int)
    if idx.size == 0:
        return 0.0
    XJ = np.asarray(X, dtype=float)[:, idx]
    return float(eigh(XJ.T @ XJ, eigvals_only=True)[-1])


def phi_star(X: np.ndarray, k: Optional[int] = None, max_size: int = MAX_ENUMERATION) -> float:
    """max of phi_J over |J| <= k; k defaults to n/(3 log p) capped at the enumeration size."""
    n, p = np.shape(X)
    if k is None:
        bound = int(n / (3 * math.log(p))) if p > 1 else 1
        k = max(1, min(bound, max_size, p))
    return sparse_eigenvalues(X, k, max_size)[1]


def compute_kstar(n: int, p: int) -> int:
    """Largest k in [1, floor(p/e)] with 2k log(p/k) <= n, or 0."""
    if n < 1 or p < 2:
        raise DomainError(f"compute_kstar needs n >= 1 and p >= 2, got n={n}, p={p}")
    kstar = 0
    # 2k log(p/k) is increasing on [1, p/e]
    for k in range(1, int(math.floor(p / math.e)) + 1):
        if 2 * k * math.log(p / k) <= n:
            kstar = k
        else:
            break
    return kstar


def classify_regime(n: int, p: int, k: int) -> str:
    """Ultra-high-dimensional when 2k log(p/k) >= n, moderate otherwise."""
    if k < 1 or k > p:
        raise DomainError(f"Sparsity k={k} must lie in [1, p={p}]")
    return ULTRA_HIGH if 2 * k * math.log(p / k) >= n else MODERATE


def _project_simplex(v: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Euclidean projection onto {w >= 0, sum w = radius}."""
    if v.size == 0:
        return v
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - radius
    ind = np.arange(1, v.size + 1)
    rho = ind[u - css / ind > 0][-1]
    theta = css[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def _project_l1_ball(v: np.ndarray, radius: float) -> np.ndarray:
    if radius <= 0:
        return np.zeros_like(v)
    if np.abs(v).sum() <= radius:
        return v
    return np.sign(v) * _project_simplex(np.abs(v), radius)


def _fista(G: np.ndarray, project, start: np.ndarray, max_iter: int, tol: float) -> Tuple[np.ndarray, bool]:
    """Accelerated projected gradient on u -> u^T G u with adaptive restart."""
    L = 2.0 * float(eigh(G, eigvals_only=True)[-1])
    u = project(start)
    if L <= 0:
        return u, True
    y, t = u.copy(), 1.0
    f_u = float(u @ G @ u)
    for _ in range(max_iter):
        u_new = project(y - (2.0 * (G @ y)) / L)
        step = float(np.linalg.norm(u_new - u))
        f_new = float(u_new @ G @ u_new)
        if step <= tol * (1.0 + float(np.linalg.norm(u))):
            return u_new, True
        t_new = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        if f_new > f_u:
            y, t_new = u_new.copy(), 1.0
        else:
            y = u_new + ((t - 1.0) / t_new) * (u_new - u)
        u, t, f_u = u_new, t_new, f_new
    return u, False


def compatibility_constant(
    X: np.ndarray,
    xi: float,
    T: Sequence[int],
    max_size: int = MAX_ENUMERATION,
    max_iter: int = COMPAT_MAX_ITER,
    tol: float = COMPAT_TOL,
) -> CompatibilityResult:
    """min over the cone ||u_Tc||_1 <= xi ||u_T||_1 of |T|^(1/2) ||Xu|| / ||u_T||_1.

    Restricted to the slice ||u_T||_1 = 1, each sign pattern of u_T turns the
    problem into a convex QP over (simplex) x (l1 ball of radius xi), solved by
    accelerated projected gradient; one run per sign pattern.
    """
    T = sorted(set(int(j) for j in T))
    _check_enumeration(len(T), max_size, "|T|")
    if xi < 0:
        raise DomainError(f"xi must be nonnegative, got {xi}")
    X = np.asarray(X, dtype=float)
    p = X.shape[1]
    if T[-1] >= p or T[0] < 0:
        raise DomainError(f"T={T} out of range for p={p}")
    G = X.T @ X
    T_idx = np.asarray(T)
    C_idx = np.setdiff1d(np.arange(p), T_idx)

    best_value, best_u, all_converged = math.inf, None, True
    for signs in product((1.0, -1.0), repeat=len(T)):
        s = np.asarray(signs)

        def project(u: np.ndarray, s: np.ndarray = s) -> np.ndarray:
            out = np.empty_like(u)
            out[T_idx] = s * _project_simplex(s * u[T_idx], 1.0)
            out[C_idx] = _project_l1_ball(u[C_idx], xi)
            return out

        start = np.zeros(p)
        start[T_idx] = s / len(T)
        u, converged = _fista(G, project, start, max_iter, tol)
        all_converged = all_converged and converged
        value = math.sqrt(len(T)) * math.sqrt(max(float(u @ G @ u), 0.0))
        if value < best_value:
            best_value, best_u = value, u

    if not all_converged:
        warning(f"Compatibility minimization for T={T} hit {max_iter} iterations")
    return CompatibilityResult(best_value, all_converged, best_u)


def _project_group_cone(
    u: np.ndarray, groups: List[np.ndarray], K: Sequence[int], weights: np.ndarray, xi: float
) -> np.ndarray:
    """Map u to a feasible point: ||u_(K)|| = 1 and the weighted group-l1 cone constraint."""
    out = u.copy()
    K_cols = np.concatenate([groups[k] for k in K])
    norm_K = float(np.linalg.norm(out[K_cols]))
    if norm_K == 0:
        out[K_cols] = 1.0
        norm_K = float(np.linalg.norm(out[K_cols]))
    out[K_cols] /= norm_K
    budget = xi * sum(weights[k] * np.linalg.norm(out[groups[k]]) for k in K)

    others = [k for k in range(len(groups)) if k not in set(K)]
    if not others:
        return out
    a = np.array([np.linalg.norm(out[groups[k]]) for k in others])
    w = weights[others]
    if float(w @ a) <= budget:
        return out
    # shrink group norms: t_k = (a_k - theta w_k)_+ with sum w_k t_k = budget
    excess = lambda theta: float(w @ np.maximum(a - theta * w, 0.0)) - budget
    theta = brentq(excess, 0.0, float(np.max(a / w)), xtol=1e-14)
    t = np.maximum(a - theta * w, 0.0)
    for k, a_k, t_k in zip(others, a, t):
        out[groups[k]] *= (t_k / a_k) if a_k > 0 else 0.0
    return out


def group_compatibility_constant(
    X: np.ndarray,
    groups: Sequence[Sequence[int]],
    xi: float,
    s: int,
    weights: Optional[Sequence[float]] = None,
    restarts: int = GROUP_COMPAT_RESTARTS,
    seed: int = 0,
    max_size: int = MAX_ENUMERATION,
    max_iter: int = 2000,
    tol: float = 1e-9,
) -> CompatibilityResult:
    """Heuristic upper bound on the group compatibility constant.

    For each group set K with |K| <= s, projected gradient with random
    restarts on ||Xu||^2 over the slice ||u_(K)||_2 = 1 intersected with
    sum_{k not in K} w_k ||u^{G_k}|| <= xi sum_{k in K} w_k ||u^{G_k}||.
    Every iterate is feasible, so the returned value is an upper bound.
    """
    _check_enumeration(s, max_size, "s")
    X = np.asarray(X, dtype=float)
    G = X.T @ X
    blocks = [np.asarray(sorted(g), dtype=int) for g in groups]
    M = len(blocks)
    w = np.ones(M) if weights is None else np.asarray(weights, dtype=float)
    L = 2.0 * float(eigh(G, eigvals_only=True)[-1])
    rng = np.random.default_rng(seed)

    best_value, best_u, converged_all = math.inf, None, True
    for size in range(1, min(s, M) + 1):
        for K in combinations(range(M), size):
            for _ in range(restarts):
                u = _project_group_cone(rng.standard_normal(X.shape[1]), blocks, K, w, xi)
                converged = False
                for _ in range(max_iter):
                    step = (2.0 * (G @ u)) / L if L > 0 else np.zeros_like(u)
                    u_new = _project_group_cone(u - step, blocks, K, w, xi)
                    if np.linalg.norm(u_new - u) <= tol:
                        u, converged = u_new, True
                        break
                    u = u_new
                converged_all = converged_all and converged
                value = math.sqrt(max(float(u @ G @ u), 0.0))
                if value < best_value:
                    best_value, best_u = value, u
    debug(f"Group compatibility (xi={xi}, s={s}): {best_value:.6g}")
    return CompatibilityResult(best_value, converged_all, best_u)


def diagnose(
    data: Dataset,
    k_max: int = MAX_ENUMERATION,
    xi: float = 4.0,
    T: Optional[Sequence[int]] = None,
    groups: Optional[Sequence[Sequence[int]]] = None,
    s: int = 1,
    sparsity: Optional[int] = None,
) -> DesignDiagnostics:
    """Collect the enumerable design diagnostics into one record."""
    k_max = min(k_max, data.p)
    phi_minus, phi_plus = {}, {}
    for k in range(1, k_max + 1):
        phi_minus[k], phi_plus[k] = sparse_eigenvalues(data.X, k)
    kstar = compute_kstar(data.n, data.p) if data.p >= 2 else 0
    report = DesignDiagnostics(
        n=data.n,
        p=data.p,
        phi_minus=phi_minus,
        phi_plus=phi_plus,
        phi_star=phi_star(data.X) if data.p >= 2 else phi_plus.get(1),
        kstar=kstar,
    )
    if T:
        report.kappa = compatibility_constant(data.X, xi, T)
    if groups:
        report.kappa_G = group_compatibility_constant(data.X, groups, xi, s)
    if sparsity is not None and data.p >= 2:
        report.regime = classify_regime(data.n, data.p, sparsity)
    return report
