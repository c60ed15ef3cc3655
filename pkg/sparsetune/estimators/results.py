"""Fit results, estimator paths and group partitions."""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from sparsetune.core.dataset import Dataset, Support
from sparsetune.errors import DimensionMismatchError, DomainError
from sparsetune.settings import ZERO_TOL

FLAG_DEGENERATE = "degenerate"
FLAG_RANK_DEFICIENT = "rank_deficient"

Lambda = Union[float, Tuple[float, ...]]


@dataclass(frozen=True, eq=False)
class FitResult:
    """Coefficient vector with its support, residual sum of squares and tuning value."""

    beta: np.ndarray
    support: Support
    lam: Lambda
    rss: float
    sigma_hat: Optional[float] = None
    flags: Tuple[str, ...] = ()
    info: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.rss < 0:
            raise DomainError(f"rss must be nonnegative, got {self.rss}")
        if self.sigma_hat is not None and self.sigma_hat <= 0 and FLAG_DEGENERATE not in self.flags:
            raise DomainError(f"sigma_hat must be positive, got {self.sigma_hat}")

    @classmethod
    def build(
        cls,
        beta: np.ndarray,
        data: Dataset,
        lam: Lambda,
        sigma_hat: Optional[float] = None,
        flags: Iterable[str] = (),
        **info: Any,
    ) -> "FitResult":
        beta = np.asarray(beta, dtype=float).copy()
        beta[np.abs(beta) <= ZERO_TOL] = 0.0
        residual = data.Y - data.X @ beta
        return cls(
            beta=beta,
            support=Support.from_beta(beta),
            lam=lam,
            rss=float(residual @ residual),
            sigma_hat=sigma_hat,
            flags=tuple(flags),
            info=dict(info),
        )

    @property
    def size(self) -> int:
        return len(self.support)

    def fitted(self, X: np.ndarray) -> np.ndarray:
        return X @ self.beta

    def in_original_scale(self, scale: np.ndarray) -> "FitResult":
        """Map coefficients fitted on column-normalized X back to the original columns."""
        return FitResult(
            beta=Dataset.to_original_scale(self.beta, scale),
            support=self.support,
            lam=self.lam,
            rss=self.rss,
            sigma_hat=self.sigma_hat,
            flags=self.flags,
            info=self.info,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "beta": self.beta.tolist(),
            "support": self.support.to_list(),
            "lambda": list(self.lam) if isinstance(self.lam, tuple) else self.lam,
            "rss": self.rss,
            "sigma_hat": self.sigma_hat,
            "flags": list(self.flags),
            "info": self.info,
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "FitResult":
        lam = payload["lambda"]
        return cls(
            beta=np.asarray(payload["beta"], dtype=float),
            support=Support(tuple(payload["support"])),
            lam=tuple(lam) if isinstance(lam, list) else float(lam),
            rss=float(payload["rss"]),
            sigma_hat=payload.get("sigma_hat"),
            flags=tuple(payload.get("flags", ())),
            info=dict(payload.get("info", {})),
        )


@dataclass(frozen=True, eq=False)
class EstimatorPath:
    """Fits aligned with a strictly decreasing tuning grid."""

    grid: np.ndarray
    fits: Tuple[FitResult, ...]
    kind: str = "lasso"

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float).reshape(-1)
        if grid.size == 0:
            raise DomainError("An estimator path needs at least one grid point")
        if np.any(np.diff(grid) >= 0):
            raise DomainError("Path grid must be strictly decreasing")
        if len(self.fits) != grid.size:
            raise DimensionMismatchError(
                f"Grid has {grid.size} values but path has {len(self.fits)} fits"
            )
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "fits", tuple(self.fits))

    def __len__(self) -> int:
        return len(self.fits)

    def __iter__(self) -> Iterator[FitResult]:
        return iter(self.fits)

    def __getitem__(self, i: int) -> FitResult:
        return self.fits[i]

    def coefficients(self) -> np.ndarray:
        """p x L matrix of the path coefficients."""
        return np.column_stack([f.beta for f in self.fits])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "grid": self.grid.tolist(),
            "fits": [f.to_dict() for f in self.fits],
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "EstimatorPath":
        return cls(
            grid=np.asarray(payload["grid"], dtype=float),
            fits=tuple(FitResult.from_dict(f) for f in payload["fits"]),
            kind=payload.get("kind", "lasso"),
        )


@dataclass(frozen=True)
class GroupStructure:
    """Partition of {0..p-1} into M nonempty blocks."""

    groups: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(sorted(int(j) for j in g)) for g in self.groups)
        if not blocks or any(len(b) == 0 for b in blocks):
            raise DomainError("Groups must be nonempty")
        flat = sorted(j for b in blocks for j in b)
        if flat != list(range(len(flat))):
            raise DomainError("Groups must be disjoint and cover 0..p-1")
        object.__setattr__(self, "groups", blocks)

    @classmethod
    def from_labels(cls, labels: Sequence[Any]) -> "GroupStructure":
        """One block per distinct label, ordered by first appearance."""
        order: Dict[Any, List[int]] = {}
        for j, label in enumerate(labels):
            order.setdefault(label, []).append(j)
        return cls(tuple(tuple(v) for v in order.values()))

    @classmethod
    def from_size(cls, p: int, T: int) -> "GroupStructure":
        if T < 1 or p % T:
            raise DomainError(f"p={p} is not a multiple of the group size T={T}")
        return cls(tuple(tuple(range(k, k + T)) for k in range(0, p, T)))

    @property
    def M(self) -> int:
        return len(self.groups)

    @property
    def p(self) -> int:
        return sum(len(g) for g in self.groups)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(g) for g in self.groups])

    def blocks(self) -> List[np.ndarray]:
        return [np.asarray(g, dtype=int) for g in self.groups]

    def active_groups(self, beta: np.ndarray, tol: float = ZERO_TOL) -> Tuple[int, ...]:
        return tuple(k for k, g in enumerate(self.blocks()) if np.any(np.abs(beta[g]) > tol))

    def columns_of(self, K: Iterable[int]) -> Tuple[int, ...]:
        return tuple(sorted(j for k in K for j in self.groups[k]))

    def to_dict(self) -> Dict[str, Any]:
        return {"groups": [list(g) for g in self.groups]}
