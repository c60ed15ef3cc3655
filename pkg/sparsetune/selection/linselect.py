"""LinSelect: score each fit against a collection of small linear spaces and keep the best.

For a fit with prediction f = X beta and a space S the criterion is

    ||Y - Pi_S f||^2 + 1/2 ||f - Pi_S f||^2 + pen(S) sigma2_S

with sigma2_S = ||Y - Pi_S Y||^2 / (n - dim S). Each fit is charged its best
space; the selected fit minimizes that charge.
"""

import math
from itertools import combinations
from typing import Dict, Iterable, List, Sequence, Set, Tuple

import numpy as np

from sparsetune.core.dataset import Dataset, Support
from sparsetune.errors import DimensionMismatchError, DomainError, UnsupportedSizeError
from sparsetune.estimators.results import EstimatorPath, FitResult, GroupStructure
from sparsetune.logger import debug, info, warning
from sparsetune.penalties.weights import delta_coordinate, delta_group
from sparsetune.selection.report import (
    FLAG_EMPTY_COLLECTION,
    CandidateRow,
    ModelSpace,
    SelectionReport,
    argmin_candidate,
    make_model_space,
    null_space,
)
from sparsetune.settings import LINSELECT_PEN_MULTIPLIER, MAX_EXHAUSTIVE_P


def coordinate_size_bound(n: int, p: int) -> float:
    """Largest admissible support size n / (3 log p)."""
    if p < 2:
        raise DomainError(f"Coordinate collections need p >= 2, got p={p}")
    return n / (3.0 * math.log(p))


def build_collection_coordinate(
    path: EstimatorPath, data: Dataset, multiplier: float = LINSELECT_PEN_MULTIPLIER
) -> Tuple[ModelSpace, ...]:
    """One space range(X_J) per distinct nonempty admissible support along the path."""
    bound = coordinate_size_bound(data.n, data.p)
    seen: Set[Tuple[int, ...]] = set()
    spaces: List[ModelSpace] = []
    for fit in path:
        J = fit.support
        if not J or J.indices in seen:
            continue
        seen.add(J.indices)
        if len(J) > bound:
            continue
        space = make_model_space(data, J, lambda d: delta_coordinate(data.p, d), multiplier)
        if space is not None:
            spaces.append(space)
    if not spaces:
        warning("LinSelect collection is empty: no admissible support along the path")
    debug(f"Coordinate collection: {len(spaces)} space(s) from {len(seen)} distinct support(s)")
    return tuple(spaces)


def build_collection_group(
    path: EstimatorPath,
    groups: GroupStructure,
    data: Dataset,
    multiplier: float = LINSELECT_PEN_MULTIPLIER,
) -> Tuple[ModelSpace, ...]:
    """One space range(X_(K)) per distinct admissible set K of active groups."""
    if groups.p != data.p:
        raise DimensionMismatchError(f"Groups cover {groups.p} columns, data has {data.p}")
    if groups.M < 2:
        raise DomainError(f"Group collections need M >= 2, got M={groups.M}")
    bound = data.n / (3.0 * math.log(groups.M))
    size_cap = data.n / 2 - 1
    sizes = groups.sizes
    seen: Set[Tuple[int, ...]] = set()
    spaces: List[ModelSpace] = []
    for fit in path:
        K = groups.active_groups(fit.beta)
        if not K or K in seen:
            continue
        seen.add(K)
        if len(K) > bound or int(np.sum(sizes[list(K)])) > size_cap:
            continue
        weight = delta_group(groups.M, len(K))
        space = make_model_space(
            data, Support(groups.columns_of(K)), lambda d: weight, multiplier, groups=K
        )
        if space is not None:
            spaces.append(space)
    if not spaces:
        warning("LinSelect group collection is empty: no admissible group set along the path")
    debug(f"Group collection: {len(spaces)} space(s) from {len(seen)} distinct group set(s)")
    return tuple(spaces)


def enumerate_coordinate_spaces(
    data: Dataset, max_size: int, multiplier: float = LINSELECT_PEN_MULTIPLIER
) -> Tuple[ModelSpace, ...]:
    """Every admissible range(X_J) with 1 <= |J| <= max_size, in size-then-lexicographic order."""
    if data.p > MAX_EXHAUSTIVE_P:
        raise UnsupportedSizeError(
            f"Exhaustive enumeration is limited to p <= {MAX_EXHAUSTIVE_P}, got p={data.p}"
        )
    spaces = []
    for size in range(1, min(max_size, data.p) + 1):
        for J in combinations(range(data.p), size):
            space = make_model_space(
                data, Support(J), lambda d: delta_coordinate(data.p, d), multiplier
            )
            if space is not None:
                spaces.append(space)
    return tuple(spaces)


def _criterion_terms(
    F: np.ndarray, data: Dataset, space: ModelSpace
) -> Tuple[np.ndarray, np.ndarray, float]:
    """Fit and approximation terms for every column of F (n x L), plus the penalty term."""
    proj = space.project(F)
    fit_term = np.sum((data.Y[:, None] - proj) ** 2, axis=0)
    approx_term = 0.5 * np.sum((F - proj) ** 2, axis=0)
    return fit_term, approx_term, space.pen * space.sigma2


def linselect_criterion(
    fit: FitResult, space: ModelSpace, data: Dataset
) -> Tuple[float, Dict[str, float]]:
    """Criterion value of one fit against one space, with its three terms."""
    F = (data.X @ fit.beta)[:, None]
    fit_term, approx_term, pen_term = _criterion_terms(F, data, space)
    components = {
        "fit": float(fit_term[0]),
        "approximation": float(approx_term[0]),
        "penalty": float(pen_term),
    }
    return sum(components.values()), components


def linselect_select(
    path: EstimatorPath,
    collection: Iterable[ModelSpace],
    data: Dataset,
    multiplier: float = LINSELECT_PEN_MULTIPLIER,
    method: str = "linselect",
) -> SelectionReport:
    """Select the path point with the smallest LinSelect criterion.

    Each fit is scored against its best space in the collection (first one
    on ties). An empty collection falls back to S = {0} and flags the report.
    """
    spaces = tuple(collection)
    flags: Tuple[str, ...] = ()
    if not spaces:
        spaces = (null_space(data, multiplier),)
        flags = (FLAG_EMPTY_COLLECTION,)
        warning("LinSelect falls back to the null space S = {0}")

    F = data.X @ path.coefficients()
    L = F.shape[1]
    best_crit = np.full(L, np.inf)
    best_terms = [None] * L
    best_space = np.zeros(L, dtype=int)
    for s, space in enumerate(spaces):
        fit_term, approx_term, pen_term = _criterion_terms(F, data, space)
        crit = fit_term + approx_term + pen_term
        better = np.flatnonzero(crit < best_crit)
        for l in better:
            best_crit[l] = crit[l]
            best_space[l] = s
            best_terms[l] = (float(fit_term[l]), float(approx_term[l]), float(pen_term))

    rows = []
    for l, fit in enumerate(path):
        fit_term, approx_term, pen_term = best_terms[l]
        space = spaces[best_space[l]]
        rows.append(
            CandidateRow(
                lam=fit.lam,
                size=fit.size,
                crit=fit_term + approx_term + pen_term,
                components={"fit": fit_term, "approximation": approx_term, "penalty": pen_term},
                space=space.columns.indices,
            )
        )
    chosen = argmin_candidate([r.crit for r in rows], [r.size for r in rows])
    sigma2 = spaces[best_space[chosen]].sigma2
    info(
        f"{method}: chose lambda={rows[chosen].lam} with |support|={rows[chosen].size}, "
        f"space {list(rows[chosen].space)}"
        + (f" [{', '.join(flags)}]" if flags else "")
    )
    return SelectionReport(
        method=method,
        rows=tuple(rows),
        chosen_index=chosen,
        sigma2=sigma2,
        flags=flags,
        extras={"collection_size": 0 if flags else len(spaces), "kind": path.kind},
    )


def linselect_select_full(
    path: EstimatorPath,
    data: Dataset,
    multiplier: float = LINSELECT_PEN_MULTIPLIER,
) -> SelectionReport:
    """LinSelect over the full collection of supports up to n / (3 log p); p <= 12 only."""
    max_size = int(math.floor(coordinate_size_bound(data.n, data.p)))
    spaces = enumerate_coordinate_spaces(data, max_size, multiplier)
    return linselect_select(path, spaces, data, multiplier, method="linselect-full")


def candidate_path(fits: Sequence[FitResult], kind: str = "candidates") -> EstimatorPath:
    """Wrap an arbitrary list of fits as a path indexed by a decreasing dummy grid."""
    grid = np.arange(len(fits), 0, -1, dtype=float)
    return EstimatorPath(grid, tuple(fits), kind=kind)
