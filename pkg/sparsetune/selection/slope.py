"""Slope heuristic: locate the minimal penalty by a dimension jump, then double it."""

import math
from typing import Callable, Dict, Mapping, Union

import numpy as np

from sparsetune.errors import DomainError
from sparsetune.logger import debug, info, warning
from sparsetune.selection.report import FLAG_NO_JUMP, CandidateRow, SelectionReport, argmin_candidate
from sparsetune.settings import LEBARBIER_C1, LEBARBIER_C2, SLOPE_GRID_SIZE, SLOPE_GRID_SPAN

Shape = Union[Mapping[int, float], Callable[[int], float]]

MONOTONE_RTOL = 1e-12


def linear_shape(dim: int) -> float:
    return float(dim)


def lebarbier_shape(n: int) -> Callable[[int], float]:
    """q -> (q+1)(2 log(n/(q+1)) + 5), the shape for q breakpoints."""

    def shape(q: int) -> float:
        return (q + 1) * (LEBARBIER_C1 * math.log(n / (q + 1)) + LEBARBIER_C2)

    return shape


def _initial_slope(rss: np.ndarray, shape: np.ndarray) -> float:
    """Slope between the two largest models, or over the whole range when that is flat."""
    for i in (-2, 0):
        gap = shape[-1] - shape[i]
        drop = rss[i] - rss[-1]
        if gap > 0 and drop > 0:
            return drop / gap
    top = float(np.max(rss))
    return top / float(np.max(shape)) if top > 0 and np.max(shape) > 0 else 1.0


def _select(rss: np.ndarray, shape: np.ndarray, dims: np.ndarray, kappa: float) -> int:
    return argmin_candidate(list(rss + kappa * shape), list(dims))


def slope_heuristic_select(
    rss_by_dim: Mapping[int, float],
    pen_shape: Shape = linear_shape,
    grid_size: int = SLOPE_GRID_SIZE,
    grid_span: float = SLOPE_GRID_SPAN,
) -> SelectionReport:
    """Select a dimension with the penalty 2 kappa_hat * shape(dim).

    kappa scans a geometric grid of grid_size points spanning
    [1/grid_span, grid_span] times an initial slope guess. kappa_hat is the
    first grid value after the largest drop of the selected dimension. With
    no drop at all the report is flagged and the selection at the largest
    kappa is returned.
    """
    if len(rss_by_dim) < 2:
        raise DomainError("The slope heuristic needs at least two dimensions")
    dims = np.array(sorted(int(d) for d in rss_by_dim))
    rss = np.array([float(rss_by_dim[d]) for d in dims])
    shape_of = pen_shape.__getitem__ if isinstance(pen_shape, Mapping) else pen_shape
    shape = np.array([float(shape_of(int(d))) for d in dims])
    if np.any(np.diff(rss) > MONOTONE_RTOL * max(1.0, float(np.max(np.abs(rss))))):
        raise DomainError("rss must be nonincreasing in the dimension")
    if np.any(np.diff(shape) <= 0):
        raise DomainError("The penalty shape must be increasing in the dimension")

    kappa0 = _initial_slope(rss, shape)
    grid = kappa0 * np.geomspace(1.0 / grid_span, grid_span, grid_size)
    selected = np.array([dims[_select(rss, shape, dims, k)] for k in grid])
    jumps = selected[:-1] - selected[1:]
    flags = ()
    if jumps.size == 0 or np.max(jumps) <= 0:
        flags = (FLAG_NO_JUMP,)
        kappa_hat = float(grid[-1])
        final_kappa = kappa_hat
        warning("Slope heuristic found no dimension jump; using the largest multiplier")
    else:
        jump_at = int(np.argmax(jumps))
        kappa_hat = float(grid[jump_at + 1])
        final_kappa = 2.0 * kappa_hat
        debug(
            f"Largest dimension jump {selected[jump_at]} -> {selected[jump_at + 1]} "
            f"at kappa={kappa_hat:.6g}"
        )

    rows = []
    for d, r, s in zip(dims, rss, shape):
        pen = final_kappa * float(s)
        rows.append(
            CandidateRow(
                lam=None,
                size=int(d),
                crit=float(r) + pen,
                components={"rss": float(r), "penalty": pen},
            )
        )
    chosen = argmin_candidate([r.crit for r in rows], [r.size for r in rows])
    info(f"Slope heuristic: kappa_hat={kappa_hat:.6g}, chose dimension {rows[chosen].size}")
    extras: Dict = {
        "kappa_hat": kappa_hat,
        "kappa_grid": grid.tolist(),
        "selected_dims": selected.tolist(),
    }
    return SelectionReport(
        method="slope", rows=tuple(rows), chosen_index=chosen, flags=flags, extras=extras
    )
