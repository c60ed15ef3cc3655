"""Small-p exhaustive benchmarks: known-variance selection and aggregation, and variance-free BGH selection."""

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from sparsetune.core.dataset import Dataset
from sparsetune.core.linalg import orthonormal_basis, project_with_basis
from sparsetune.errors import DomainError, UnsupportedSizeError
from sparsetune.logger import debug, info
from sparsetune.penalties.classical import PenaltyKind, classical_penalties
from sparsetune.penalties.special import log_binomial
from sparsetune.selection.linselect import enumerate_coordinate_spaces
from sparsetune.selection.report import CandidateRow, SelectionReport, argmin_candidate
from sparsetune.settings import LINSELECT_PEN_MULTIPLIER, MAX_EXHAUSTIVE_P


def _check_size(p: int) -> None:
    if p > MAX_EXHAUSTIVE_P:
        raise UnsupportedSizeError(
            f"Exhaustive benchmarks are limited to p <= {MAX_EXHAUSTIVE_P}, got p={p}"
        )


def minimax_kstar(n: int, p: int) -> int:
    """Largest k <= p with 2k (1 + log(p/k)) <= n, or 0."""
    kstar = 0
    for k in range(1, p + 1):
        if 2 * k * (1 + math.log(p / k)) <= n:
            kstar = k
    return kstar


@dataclass(frozen=True, eq=False)
class _Model:
    columns: Tuple[int, ...]
    dim: int
    projection: np.ndarray
    rss: float
    full: bool = False


def _known_variance_models(data: Dataset) -> Iterator[_Model]:
    """Nonempty J with 2|J|(1 + log(p/|J|)) <= n, then range(X) itself.

    J = {0..p-1} is represented by the full model only.
    """
    _check_size(data.p)
    kstar = minimax_kstar(data.n, data.p)
    for size in range(1, min(kstar, data.p - 1) + 1):
        for J in combinations(range(data.p), size):
            Q = orthonormal_basis(data.X, J)
            proj = project_with_basis(Q, data.Y)
            r = data.Y - proj
            yield _Model(J, Q.shape[1], proj, float(r @ r))
    Q = orthonormal_basis(data.X)
    proj = project_with_basis(Q, data.Y)
    r = data.Y - proj
    yield _Model(tuple(range(data.p)), Q.shape[1], proj, float(r @ r), full=True)


def _check_sigma2(sigma2: float) -> None:
    if not sigma2 > 0 or not math.isfinite(sigma2):
        raise DomainError(f"sigma2 must be positive and finite, got {sigma2}")


def bm_select_exhaustive(data: Dataset, sigma2: float) -> SelectionReport:
    """Known-variance selection: ||Y - Pi_S Y||^2 + 4 d (4 + log(p/d)) sigma2, or + 2 n sigma2 for range(X).

    Ties go to the smaller dimension, then the lexicographically first support.
    """
    _check_sigma2(sigma2)
    rows = []
    for model in _known_variance_models(data):
        if model.full:
            pen = 2.0 * data.n * sigma2
        else:
            pen = classical_penalties(PenaltyKind.BIRGE_MASSART, dim=model.dim, p=data.p, sigma2=sigma2)
        rows.append(
            CandidateRow(
                lam=None,
                size=model.dim,
                crit=model.rss + pen,
                components={"rss": model.rss, "penalty": pen},
                space=model.columns,
            )
        )
    chosen = argmin_candidate([r.crit for r in rows], [r.size for r in rows])
    info(f"Birge-Massart benchmark chose {list(rows[chosen].space)} among {len(rows)} models")
    return SelectionReport(
        method="birge-massart",
        rows=tuple(rows),
        chosen_index=chosen,
        sigma2=sigma2,
        extras={"kstar": minimax_kstar(data.n, data.p)},
    )


@dataclass(frozen=True, eq=False)
class Aggregate:
    """Exponentially weighted mixture of least-squares projections."""

    fitted: np.ndarray
    weights: np.ndarray
    models: Tuple[Tuple[int, ...], ...]
    log_prior: np.ndarray

    def prior_limit(self) -> np.ndarray:
        """Weights reached as sigma2 -> infinity.

        This is the model prior tilted by exp(-dim/2), not the bare prior: the
        dimension factor does not depend on sigma2.
        """
        return np.exp(self.log_prior - logsumexp(self.log_prior))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "fitted": self.fitted.tolist(),
            "models": [list(m) for m in self.models],
            "weights": self.weights.tolist(),
        }


def lb_aggregate_exhaustive(data: Dataset, sigma2: float) -> Aggregate:
    """Mixture sum_S w_S Pi_S Y with w_S proportional to

    exp(-(||Y - Pi_S Y||^2 + 2 sigma2 dim S) / (4 sigma2)) / (k* C(p, dim S)),

    the prior factor being 1 for range(X).
    """
    _check_sigma2(sigma2)
    kstar = minimax_kstar(data.n, data.p)
    models: List[_Model] = list(_known_variance_models(data))
    log_prior = np.array(
        [
            -(m.dim / 2.0) + (0.0 if m.full else -(math.log(kstar) + log_binomial(data.p, m.dim)))
            for m in models
        ]
    )
    rss = np.array([m.rss for m in models])
    log_w = log_prior - rss / (4.0 * sigma2)
    weights = np.exp(log_w - logsumexp(log_w))
    fitted = np.sum([w * m.projection for w, m in zip(weights, models)], axis=0)
    top = int(np.argmax(weights))
    debug(
        f"Aggregation over {len(models)} models, largest weight {weights[top]:.4g} "
        f"on {list(models[top].columns)}"
    )
    return Aggregate(
        fitted=fitted,
        weights=weights,
        models=tuple(m.columns for m in models),
        log_prior=log_prior,
    )


def bgh_select_exhaustive(
    data: Dataset,
    max_size: Optional[int] = None,
    multiplier: float = LINSELECT_PEN_MULTIPLIER,
) -> SelectionReport:
    """Variance-free selection: argmin ||Y - Pi_S Y||^2 (1 + pen(S)/(n - dim S)) over |J| <= (n-1)/4."""
    _check_size(data.p)
    bound = int(math.floor((data.n - 1) / 4))
    max_size = bound if max_size is None else min(max_size, bound)
    spaces = enumerate_coordinate_spaces(data, max_size, multiplier)
    if not spaces:
        raise DomainError(f"No admissible space for n={data.n}, p={data.p}")
    rows = []
    for space in spaces:
        rss = space.sigma2 * (data.n - space.dim)
        extra = rss * space.pen / (data.n - space.dim)
        rows.append(
            CandidateRow(
                lam=None,
                size=space.dim,
                crit=rss + extra,
                components={"rss": rss, "penalty": extra},
                space=space.columns.indices,
            )
        )
    chosen = argmin_candidate([r.crit for r in rows], [r.size for r in rows])
    info(f"BGH benchmark chose {list(rows[chosen].space)} among {len(rows)} spaces")
    return SelectionReport(
        method="bgh",
        rows=tuple(rows),
        chosen_index=chosen,
        sigma2=spaces[chosen].sigma2,
        extras={"max_size": max_size},
    )
