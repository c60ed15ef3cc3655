"""Special functions behind the penalty equations."""

import math

from scipy.special import betainc, gammaln

from sparsetune.errors import DomainError


def log_binomial(p: float, d: float) -> float:
    """log C(p, d) through log-gamma; symmetric in d <-> p - d bit for bit."""
    if not (0 <= d <= p):
        raise DomainError(f"log_binomial needs 0 <= d <= p, got p={p}, d={d}")
    lo, hi = sorted((d, p - d))
    return float(gammaln(p + 1) - (gammaln(lo + 1) + gammaln(hi + 1)))


def fisher_survival(d1: float, d2: float, x: float) -> float:
    """P(F_{d1,d2} >= x) as the regularized incomplete beta I_{d2/(d2+d1 x)}(d2/2, d1/2)."""
    if d1 <= 0 or d2 <= 0:
        raise DomainError(f"Fisher degrees of freedom must be positive, got ({d1}, {d2})")
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"fisher_survival needs a finite x >= 0, got {x}")
    if x == 0:
        return 1.0
    z = d2 / (d2 + d1 * x)
    return float(betainc(d2 / 2.0, d1 / 2.0, z))


def chi2_excess_expectation(t: float, d_u: float, d_v: float) -> float:
    """E[(U - t V)_+] for independent U ~ chi2(d_u), V ~ chi2(d_v).

    Uses E[U 1{U >= tV}] = d_u P(F_{d_u+2, d_v} >= t d_v/(d_u+2)) and
    E[V 1{U >= tV}] = d_v P(F_{d_u, d_v+2} >= t (d_v+2)/d_u).
    """
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    upper = d_u * fisher_survival(d_u + 2, d_v, t * d_v / (d_u + 2))
    lower = t * d_v * fisher_survival(d_u, d_v + 2, t * (d_v + 2) / d_u)
    return upper - lower
