"""Exact least-squares segmentation by dynamic programming over segment costs."""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from sparsetune.errors import DomainError
from sparsetune.logger import debug


@dataclass(frozen=True, eq=False)
class Segmentation:
    """Breakpoints (segment start indices in 1..n-1) and the piecewise-constant fit."""

    breakpoints: Tuple[int, ...]
    fitted: np.ndarray
    rss: float
    rss_by_q: Dict[int, float] = field(default_factory=dict)
    method: str = "dp"
    criterion: Dict[int, float] = field(default_factory=dict)
    flags: Tuple[str, ...] = ()
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def q(self) -> int:
        return len(self.breakpoints)

    def segments(self) -> List[Tuple[int, int]]:
        bounds = [0, *self.breakpoints, self.fitted.size]
        return list(zip(bounds[:-1], bounds[1:]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "q": self.q,
            "breakpoints": list(self.breakpoints),
            "fitted": self.fitted.tolist(),
            "rss": self.rss,
            "rss_by_q": {str(q): v for q, v in sorted(self.rss_by_q.items())},
            "criterion": {str(q): v for q, v in sorted(self.criterion.items())},
            "flags": list(self.flags),
            "extras": dict(self.extras),
        }


def check_signal(Y: Sequence[float]) -> np.ndarray:
    y = np.asarray(Y, dtype=float).reshape(-1)
    if y.size < 1:
        raise DomainError("Empty signal")
    if not np.all(np.isfinite(y)):
        raise DomainError("Signal contains non-finite values")
    return y


def segment_means(Y: Sequence[float], breakpoints: Iterable[int]) -> np.ndarray:
    """Replace each segment of Y by its mean."""
    y = check_signal(Y)
    bounds = [0, *sorted(int(b) for b in breakpoints), y.size]
    fitted = np.empty_like(y)
    for start, stop in zip(bounds[:-1], bounds[1:]):
        if not 0 <= start < stop <= y.size:
            raise DomainError(f"Invalid breakpoints {bounds[1:-1]} for n={y.size}")
        fitted[start:stop] = np.mean(y[start:stop])
    return fitted


def segment_costs(y: np.ndarray) -> np.ndarray:
    """(n+1) x (n+1) table: entry (i, j) is the squared deviation of y[i:j] from its mean, inf for j <= i."""
    n = y.size
    yc = y - np.mean(y)
    D = np.full((n + 1, n + 1), np.inf)
    for i in range(n):
        seg = yc[i:]
        csum = np.cumsum(seg)
        D[i, i + 1 :] = np.maximum(np.cumsum(seg**2) - csum**2 / np.arange(1, n - i + 1), 0.0)
    return D


@dataclass(frozen=True, eq=False)
class PartitionFamily:
    """Best partition of the signal for every number of breakpoints q = 0..q_max."""

    y: np.ndarray
    breakpoints: Dict[int, Tuple[int, ...]]
    rss: Dict[int, float]

    @property
    def q_max(self) -> int:
        return max(self.breakpoints)

    def segmentation(
        self,
        q: int,
        method: str = "dp",
        criterion: Optional[Dict[int, float]] = None,
        flags: Tuple[str, ...] = (),
        **extras: Any,
    ) -> Segmentation:
        bps = self.breakpoints[q]
        return Segmentation(
            breakpoints=bps,
            fitted=segment_means(self.y, bps),
            rss=self.rss[q],
            rss_by_q=dict(self.rss),
            method=method,
            criterion=dict(criterion or {}),
            flags=flags,
            extras=dict(extras),
        )


def dp_best_partitions(Y: Sequence[float], q_max: int) -> PartitionFamily:
    """Exact minimizer of the residual sum of squares over all sets of q breakpoints, q <= q_max.

    A suffix table best[q, i] holds the optimal cost of y[i:] cut q times;
    backtracking from i = 0 takes the smallest optimal cut first, which
    yields the lexicographically smallest optimal breakpoint set.
    """
    y = check_signal(Y)
    n = y.size
    if not 0 <= q_max <= n - 1:
        raise DomainError(f"Need 0 <= q_max <= n-1, got q_max={q_max}, n={n}")

    D = segment_costs(y)
    best = np.full((q_max + 1, n + 1), np.inf)
    cut = np.zeros((q_max + 1, n + 1), dtype=int)
    best[0, :n] = D[:n, n]
    for q in range(1, q_max + 1):
        # candidate cut b in (i, n): cost of y[i:b] plus the best q-1 cuts of y[b:]
        total = D[:n, :n] + best[q - 1, :n][None, :]
        cut[q, :n] = np.argmin(total, axis=1)
        best[q, :n] = total[np.arange(n), cut[q, :n]]

    breakpoints: Dict[int, Tuple[int, ...]] = {}
    rss: Dict[int, float] = {}
    for q in range(q_max + 1):
        bps = []
        i = 0
        for remaining in range(q, 0, -1):
            i = int(cut[remaining, i])
            bps.append(i)
        breakpoints[q] = tuple(bps)
        r = y - segment_means(y, bps)
        rss[q] = float(r @ r)
    debug(f"DP segmentation of n={n} points up to q={q_max}")
    return PartitionFamily(y=y, breakpoints=breakpoints, rss=rss)
