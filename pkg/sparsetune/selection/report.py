"""Model spaces and the selection reports produced by every selector."""

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from sparsetune.core.dataset import Dataset, Support
from sparsetune.core.linalg import orthonormal_basis, project_with_basis
from sparsetune.errors import UnavailableEstimatorError
from sparsetune.penalties.solver import linselect_penalty
from sparsetune.settings import LINSELECT_PEN_MULTIPLIER

FLAG_EMPTY_COLLECTION = "empty_collection"
FLAG_ZERO_RSS = "zero_rss"
FLAG_ZERO_VARIANCE = "zero_variance"
FLAG_NO_JUMP = "no_jump"
FLAG_ODD_LENGTH = "odd_length"

Lambda = Union[float, Tuple[float, ...], None]


@dataclass(frozen=True, eq=False)
class ModelSpace:
    """Linear space range(X_J) with its complexity weight, penalty and variance estimate."""

    columns: Support
    dim: int
    delta: float
    pen_delta: float
    pen: float
    sigma2: float
    basis: np.ndarray = field(repr=False)
    groups: Optional[Tuple[int, ...]] = None

    def project(self, v: np.ndarray) -> np.ndarray:
        """Pi_S v; v may be an n-vector or an n x L matrix."""
        return project_with_basis(self.basis, v)

    def to_dict(self) -> Dict[str, Any]:
        payload = {
            "columns": self.columns.to_list(),
            "dim": self.dim,
            "delta": self.delta,
            "pen_delta": self.pen_delta,
            "pen": self.pen,
            "sigma2": self.sigma2,
        }
        if self.groups is not None:
            payload["groups"] = list(self.groups)
        return payload


def is_admissible(n: int, dim: int, delta: float) -> bool:
    return 1 <= dim <= n / 2 - 1 and delta <= 2 * n / 3


def make_model_space(
    data: Dataset,
    columns: Support,
    delta_of_dim: Callable[[int], float],
    multiplier: float = LINSELECT_PEN_MULTIPLIER,
    groups: Optional[Tuple[int, ...]] = None,
) -> Optional[ModelSpace]:
    """Build the space spanned by the columns, or None when it is not admissible.

    dim is the numerical rank of X_J; the weight Delta is evaluated at that rank.
    """
    Q = orthonormal_basis(data.X, columns.indices)
    dim = Q.shape[1]
    if dim < 1:
        return None
    delta = delta_of_dim(dim)
    if not is_admissible(data.n, dim, delta):
        return None
    spec = linselect_penalty(data.n, dim, delta, multiplier)
    r = data.Y - project_with_basis(Q, data.Y)
    return ModelSpace(
        columns=columns,
        dim=dim,
        delta=delta,
        pen_delta=spec.pen_delta,
        pen=spec.pen,
        sigma2=float(r @ r) / (data.n - dim),
        basis=Q,
        groups=groups,
    )


def null_space(data: Dataset, multiplier: float = LINSELECT_PEN_MULTIPLIER) -> ModelSpace:
    """Fallback S = {0}: Pi_S = 0, sigma2 = ||Y||^2 / n, penalty of (n, 1, log p)."""
    delta = math.log(data.p)
    spec = linselect_penalty(data.n, 1, delta, multiplier)
    return ModelSpace(
        columns=Support(),
        dim=0,
        delta=delta,
        pen_delta=spec.pen_delta,
        pen=spec.pen,
        sigma2=float(data.Y @ data.Y) / data.n,
        basis=np.zeros((data.n, 0)),
    )


@dataclass(frozen=True)
class CandidateRow:
    """One scored candidate; `excluded` names why it could not be selected."""

    lam: Lambda
    size: int
    crit: float
    components: Dict[str, float] = field(default_factory=dict)
    space: Optional[Tuple[int, ...]] = None
    excluded: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "lambda": list(self.lam) if isinstance(self.lam, tuple) else self.lam,
            "size": self.size,
            "crit": self.crit,
            "components": dict(self.components),
        }
        if self.space is not None:
            payload["space"] = list(self.space)
        if self.excluded is not None:
            payload["excluded"] = self.excluded
        return payload


@dataclass(frozen=True)
class SelectionReport:
    """Scored candidates and the chosen one."""

    method: str
    rows: Tuple[CandidateRow, ...]
    chosen_index: int
    sigma2: Optional[float] = None
    flags: Tuple[str, ...] = ()
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def chosen(self) -> CandidateRow:
        return self.rows[self.chosen_index]

    @property
    def chosen_lambda(self) -> Lambda:
        return self.chosen.lam

    @property
    def chosen_space(self) -> Optional[Tuple[int, ...]]:
        return self.chosen.space

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "chosen_index": self.chosen_index,
            "chosen_lambda": self.chosen.to_dict()["lambda"],
            "chosen_space": None if self.chosen_space is None else list(self.chosen_space),
            "chosen_crit": self.chosen.crit,
            "sigma2": self.sigma2,
            "flags": list(self.flags),
            "extras": dict(self.extras),
            "rows": [row.to_dict() for row in self.rows],
        }


def argmin_candidate(crits: Sequence[float], sizes: Sequence[int]) -> int:
    """Index of the smallest criterion; ties go to the smaller size, then the earlier row.

    Rows along a path are ordered by decreasing lambda, so an earlier row
    means a larger lambda.
    """
    best = None
    for i, (c, s) in enumerate(zip(crits, sizes)):
        if math.isnan(c) or c == math.inf:
            continue
        if best is None or (c, s) < (crits[best], sizes[best]):
            best = i
    if best is None:
        raise UnavailableEstimatorError("No selectable candidate: every criterion is infinite")
    return best
