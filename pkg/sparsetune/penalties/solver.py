"""Root solvers for the Fisher-quantile penalty equations."""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

from scipy.optimize import bisect

from sparsetune.errors import BracketError, DomainError
from sparsetune.logger import debug
from sparsetune.penalties.cache import PENALTY_CACHE, PenaltyCache
from sparsetune.penalties.special import chi2_excess_expectation, log_binomial
from sparsetune.settings import (
    LINSELECT_PEN_MULTIPLIER,
    PEN_MAX_BRACKET_DOUBLINGS,
    PEN_ROOT_TOL,
    SEG_PEN_MULTIPLIER,
)

PEN_DELTA_XTOL = 1e-13
PEN_DELTA_RTOL = 1e-15
SEG_PEN_XTOL = 1e-15
SEG_PEN_RTOL = 1e-15
BISECT_MAX_ITER = 1000
BRACKET_EPS = 1e-12


@dataclass(frozen=True)
class PenaltySpec:
    n: int
    D: int
    Delta: float
    pen_delta: float
    pen: float

    def to_dict(self):
        return {"n": self.n, "D": self.D, "Delta": self.Delta, "pen_delta": self.pen_delta, "pen": self.pen}


@dataclass(frozen=True)
class SegPenaltySpec:
    n: int
    q: int
    K: float
    pen_q: float

    def to_dict(self):
        return {"n": self.n, "q": self.q, "K": self.K, "pen_q": self.pen_q}


def check_pen_delta_domain(n: int, D: int, Delta: float) -> None:
    if not (1 <= D <= n / 2 - 1):
        raise DomainError(f"Need 1 <= D <= n/2 - 1, got n={n}, D={D}")
    if not (0 <= Delta <= 2 * n / 3) or not math.isfinite(Delta):
        raise DomainError(f"Need 0 <= Delta <= 2n/3, got n={n}, Delta={Delta}")


def pen_delta_equation(x: float, n: int, D: int) -> float:
    """E[(U - x/(n-D) V)_+] with U ~ chi2(D+1), V ~ chi2(n-D-1); decreasing in x."""
    N = n - D
    return chi2_excess_expectation(x / N, D + 1, N - 1)


def pen_delta_bounds(n: int, D: int, Delta: float) -> Tuple[float, float]:
    """Initial bracket, linear in max(D, Delta)."""
    lo = max(BRACKET_EPS, 2 * Delta + D - 20)
    hi = 20 * max(D, Delta, 1) + 50
    return lo, hi


def _solve_decreasing(
    g: Callable[[float], float],
    target: float,
    lo: float,
    hi: float,
    lo_reset: float,
    xtol: float,
    rtol: float,
    label: str,
) -> float:
    """Bisection root of g(x) = target for a decreasing g, expanding the bracket."""
    f = lambda x: g(x) - target
    if f(lo) < 0:
        lo = lo_reset
    doublings = 0
    while f(hi) > 0:
        lo, hi = hi, 2 * hi
        doublings += 1
        if doublings > PEN_MAX_BRACKET_DOUBLINGS:
            raise BracketError(f"{label}: no sign change found", (lo, hi))
    if doublings:
        debug(f"{label}: bracket expanded {doublings} time(s) to [{lo:.6g}, {hi:.6g}]")
    if f(hi) == 0:
        return hi
    if f(lo) <= 0:
        raise BracketError(f"{label}: bracket does not enclose the root", (lo, hi))
    x = bisect(f, lo, hi, xtol=xtol, rtol=rtol, maxiter=BISECT_MAX_ITER)
    residual = abs(f(x))
    if residual > PEN_ROOT_TOL:
        raise BracketError(f"{label}: residual {residual:.3g} above tolerance", (lo, hi), residual)
    return x


def pen_delta_solve(
    n: int, D: int, Delta: float, cache: Optional[PenaltyCache] = PENALTY_CACHE
) -> float:
    """Solve E[(U - x/(n-D) V)_+] = exp(-Delta) for x (the value pen_Delta)."""
    check_pen_delta_domain(n, D, Delta)

    def compute() -> float:
        lo, hi = pen_delta_bounds(n, D, Delta)
        return _solve_decreasing(
            lambda x: pen_delta_equation(x, n, D),
            math.exp(-Delta),
            lo,
            hi,
            BRACKET_EPS,
            PEN_DELTA_XTOL,
            PEN_DELTA_RTOL,
            f"pen_delta(n={n}, D={D}, Delta={Delta:.6g})",
        )

    if cache is None:
        return compute()
    return cache.get_or_compute(("pen_delta", int(n), int(D), float(Delta)), compute)


def linselect_penalty(
    n: int, D: int, Delta: float, multiplier: float = LINSELECT_PEN_MULTIPLIER
) -> PenaltySpec:
    """pen(S) = multiplier * pen_Delta(S), 1.1 by default."""
    value = pen_delta_solve(n, D, Delta)
    return PenaltySpec(n=n, D=D, Delta=Delta, pen_delta=value, pen=multiplier * value)


def seg_pen_target(n: int, q: int) -> float:
    """1 / ((q+1) C(n-1, q)), computed in log space."""
    return math.exp(-math.log(q + 1) - log_binomial(n - 1, q))


def seg_pen_equation(pen: float, n: int, q: int) -> float:
    return chi2_excess_expectation(pen, q + 2, n - q - 2)


def seg_pen_solve(n: int, q: int, cache: Optional[PenaltyCache] = PENALTY_CACHE) -> float:
    """Solve E[(U - pen V)_+] = 1/((q+1) C(n-1, q)), U ~ chi2(q+2), V ~ chi2(n-q-2)."""
    if not (0 <= q <= (n - 1) / 4) or n - q - 2 < 1:
        raise DomainError(f"Need 0 <= q <= (n-1)/4, got n={n}, q={q}")

    def compute() -> float:
        return _solve_decreasing(
            lambda x: seg_pen_equation(x, n, q),
            seg_pen_target(n, q),
            0.0,
            1.0,
            0.0,
            SEG_PEN_XTOL,
            SEG_PEN_RTOL,
            f"seg_pen(n={n}, q={q})",
        )

    if cache is None:
        return compute()
    return cache.get_or_compute(("seg_pen", int(n), int(q), 0.0), compute)


def segmentation_penalty(n: int, q: int, K: float = SEG_PEN_MULTIPLIER) -> SegPenaltySpec:
    return SegPenaltySpec(n=n, q=q, K=K, pen_q=seg_pen_solve(n, q))
