"""Choosing the number of breakpoints: variance-free, known-variance, slope-heuristic and TV + LinSelect."""

import math
from typing import Dict, Optional, Sequence, Tuple

from sparsetune.errors import DomainError
from sparsetune.logger import info, warning
from sparsetune.penalties.classical import PenaltyKind, classical_penalties
from sparsetune.penalties.solver import segmentation_penalty
from sparsetune.segmentation.dp import (
    Segmentation,
    check_signal,
    dp_best_partitions,
    segment_means,
)
from sparsetune.segmentation.tv import tv_path, to_segment_design
from sparsetune.selection.linselect import build_collection_coordinate, linselect_select
from sparsetune.selection.report import FLAG_ODD_LENGTH, FLAG_ZERO_RSS
from sparsetune.selection.slope import lebarbier_shape, slope_heuristic_select
from sparsetune.settings import (
    LINSELECT_PEN_MULTIPLIER,
    PATH_GRID_RATIO,
    PATH_GRID_SIZE,
    SEG_PEN_MULTIPLIER,
)


def default_bgh_qmax(n: int) -> int:
    return max(0, min(n - 1, (n - 1) // 4))


def segment_select_bgh(
    Y: Sequence[float], q_max: Optional[int] = None, K: float = SEG_PEN_MULTIPLIER
) -> Segmentation:
    """argmin over q of rss_q (1 + K pen(q)), pen(q) from the segmentation penalty equation.

    A partition with zero residual wins outright (criterion 0) and flags the result.
    """
    y = check_signal(Y)
    n = y.size
    q_max = default_bgh_qmax(n) if q_max is None else q_max
    if not 0 <= q_max <= (n - 1) / 4:
        raise DomainError(f"Need 0 <= q_max <= (n-1)/4, got q_max={q_max}, n={n}")
    family = dp_best_partitions(y, q_max)
    criterion: Dict[int, float] = {}
    flags: Tuple[str, ...] = ()
    for q in range(q_max + 1):
        rss = family.rss[q]
        if rss == 0.0:
            criterion[q] = 0.0
            flags = (FLAG_ZERO_RSS,)
            warning(f"Segmentation with q={q} fits the signal exactly")
            break
        criterion[q] = rss * (1.0 + K * segmentation_penalty(n, q, K).pen_q)
    chosen = min(criterion, key=lambda q: (criterion[q], q))
    info(f"BGH segmentation: q={chosen} among 0..{q_max}")
    return family.segmentation(chosen, method="bgh", criterion=criterion, flags=flags, K=K)


def variance_plugin(Y: Sequence[float]) -> Tuple[float, Tuple[str, ...]]:
    """Difference-based variance sum_i (Y_2i - Y_2i-1)^2 / n over consecutive pairs.

    Odd n drops the last point (and divides by n - 1), flagged.
    """
    y = check_signal(Y)
    if y.size < 2:
        raise DomainError("The difference-based variance needs n >= 2")
    flags: Tuple[str, ...] = ()
    if y.size % 2:
        y = y[:-1]
        flags = (FLAG_ODD_LENGTH,)
        warning("Odd signal length: the last point is dropped from the variance estimate")
    d = y[1::2] - y[0::2]
    return float(d @ d) / y.size, flags


def segment_select_lebarbier(
    Y: Sequence[float], q_max: Optional[int] = None, sigma2: Optional[float] = None
) -> Segmentation:
    """argmin over q of rss_q + (q+1)(2 log(n/(q+1)) + 5) sigma2; ties go to the larger q.

    sigma2 defaults to the difference-based estimate.
    """
    y = check_signal(Y)
    n = y.size
    q_max = n - 1 if q_max is None else q_max
    flags: Tuple[str, ...] = ()
    if sigma2 is None:
        sigma2, flags = variance_plugin(y)
    if not sigma2 > 0 or not math.isfinite(sigma2):
        raise DomainError(f"sigma2 must be positive and finite, got {sigma2}")
    family = dp_best_partitions(y, q_max)
    criterion = {
        q: family.rss[q] + classical_penalties(PenaltyKind.LEBARBIER, n=n, q=q, sigma2=sigma2)
        for q in range(q_max + 1)
    }
    chosen = min(criterion, key=lambda q: (criterion[q], -q))
    info(f"Lebarbier segmentation: sigma2={sigma2:.6g}, q={chosen}")
    return family.segmentation(
        chosen, method="lebarbier", criterion=criterion, flags=flags, sigma2=sigma2
    )


def segment_select_slope(Y: Sequence[float], q_max: Optional[int] = None) -> Segmentation:
    """Slope heuristic on rss_q with the shape (q+1)(2 log(n/(q+1)) + 5)."""
    y = check_signal(Y)
    n = y.size
    q_max = max(1, default_bgh_qmax(n)) if q_max is None else q_max
    if not 1 <= q_max <= n - 1:
        raise DomainError(f"Need 1 <= q_max <= n-1, got q_max={q_max}, n={n}")
    family = dp_best_partitions(y, q_max)
    report = slope_heuristic_select(family.rss, lebarbier_shape(n))
    chosen = report.chosen.size
    criterion = {row.size: row.crit for row in report.rows}
    return family.segmentation(
        chosen,
        method="slope",
        criterion=criterion,
        flags=report.flags,
        kappa_hat=report.extras["kappa_hat"],
    )


def tv_linselect_select(
    Y: Sequence[float],
    grid: Optional[Sequence[float]] = None,
    size: int = PATH_GRID_SIZE,
    ratio: float = PATH_GRID_RATIO,
    multiplier: float = LINSELECT_PEN_MULTIPLIER,
) -> Segmentation:
    """Tune the TV path by LinSelect in the segment-indicator design, then refit segment means.

    The collection is built from the intercept-plus-breakpoints supports along the path.
    """
    y = check_signal(Y)
    path = tv_path(y, grid, size, ratio)
    seg_path, seg_data = to_segment_design(path, y)
    collection = build_collection_coordinate(seg_path, seg_data, multiplier)
    report = linselect_select(seg_path, collection, seg_data, multiplier, method="tv+linselect")
    chosen = seg_path[report.chosen_index]
    breakpoints = tuple(j for j in chosen.support if j != 0)
    fitted = segment_means(y, breakpoints)
    r = y - fitted

    rss_by_q: Dict[int, float] = {}
    criterion: Dict[int, float] = {}
    for fit, row in zip(seg_path, report.rows):
        q = sum(1 for j in fit.support if j != 0)
        refit = y - segment_means(y, [j for j in fit.support if j != 0])
        rss_by_q[q] = min(rss_by_q.get(q, math.inf), float(refit @ refit))
        criterion[q] = min(criterion.get(q, math.inf), row.crit)
    info(f"TV + LinSelect segmentation: lambda={report.chosen_lambda}, q={len(breakpoints)}")
    return Segmentation(
        breakpoints=breakpoints,
        fitted=fitted,
        rss=float(r @ r),
        rss_by_q=rss_by_q,
        method="tv+linselect",
        criterion=criterion,
        flags=report.flags,
        extras={"lambda": report.chosen_lambda, "sigma2": report.sigma2},
    )
