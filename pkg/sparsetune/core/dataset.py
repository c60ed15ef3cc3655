"""Regression instances (X, Y), supports and CSV ingestion."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Tuple, Union

import numpy as np

from sparsetune.errors import DataError, DimensionMismatchError, DomainError
from sparsetune.logger import debug, info
from sparsetune.settings import ZERO_TOL

CSV_DELIMITER = ","


@dataclass(frozen=True)
class Support:
    """Sorted set of column indices in [0, p)."""

    indices: Tuple[int, ...] = ()

    def __post_init__(self):
        ordered = tuple(sorted(int(i) for i in self.indices))
        if len(set(ordered)) != len(ordered):
            raise DomainError(f"Support indices must be unique, got {ordered}")
        object.__setattr__(self, "indices", ordered)

    @classmethod
    def from_indices(cls, indices: Iterable[int], p: int) -> "Support":
        support = cls(tuple(indices))
        if support.indices and (support.indices[0] < 0 or support.indices[-1] >= p):
            raise DomainError(f"Support {support.indices} out of range for p={p}")
        return support

    @classmethod
    def from_beta(cls, beta: np.ndarray, tol: float = ZERO_TOL) -> "Support":
        return cls(tuple(np.flatnonzero(np.abs(beta) > tol).tolist()))

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def __contains__(self, j: object) -> bool:
        return j in self.indices

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=int)

    def to_list(self) -> List[int]:
        return list(self.indices)


@dataclass(frozen=True)
class Dataset:
    """Fixed design X (n x p) with response Y (n)."""

    X: np.ndarray
    Y: np.ndarray
    column_norms: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        Y = np.asarray(self.Y, dtype=float).reshape(-1)
        if X.shape[0] != Y.shape[0]:
            raise DimensionMismatchError(
                f"X has {X.shape[0]} rows but Y has {Y.shape[0]} entries"
            )
        if X.shape[0] < 2 or X.shape[1] < 1:
            raise DomainError(f"Need n >= 2 and p >= 1, got X of shape {X.shape}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise DataError("Dataset contains non-finite entries")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "column_norms", np.linalg.norm(X, axis=0))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def with_response(self, Y: np.ndarray) -> "Dataset":
        return Dataset(self.X, Y)

    def subset(self, rows: np.ndarray) -> "Dataset":
        return Dataset(self.X[rows], self.Y[rows])

    def normalized(self) -> Tuple["Dataset", np.ndarray]:
        """Return the unit-column-norm dataset and the scale applied per column.

        Zero columns are left untouched (scale 1). Coefficients fitted on the
        normalized design map back with `to_original_scale`.
        """
        scale = np.where(self.column_norms > 0, self.column_norms, 1.0)
        return Dataset(self.X / scale, self.Y), scale

    @staticmethod
    def to_original_scale(beta: np.ndarray, scale: np.ndarray) -> np.ndarray:
        return np.asarray(beta, dtype=float) / scale


def _read_matrix(path: Path, header: bool) -> Tuple[np.ndarray, Optional[List[str]]]:
    names = None
    try:
        with open(path, "r", encoding="utf8") as f:
            if header:
                names = [c.strip() for c in f.readline().strip().split(CSV_DELIMITER)]
            values = np.loadtxt(f, delimiter=CSV_DELIMITER, ndmin=2)
    except FileNotFoundError as e:
        raise DataError(f"CSV file not found: {path}") from e
    except ValueError as e:
        raise DataError(f"Failed to parse {path}: {e}") from e
    if values.size == 0:
        raise DataError(f"No observations in {path}")
    if names is not None and len(names) != values.shape[1]:
        raise DataError(
            f"{path}: header has {len(names)} names but rows have {values.shape[1]} values"
        )
    return values, names


def _column_index(response_col: Union[int, str], names: Optional[List[str]], width: int) -> int:
    if isinstance(response_col, str) and not response_col.lstrip("-").isdigit():
        if names is None or response_col not in names:
            raise DataError(f"Response column {response_col!r} not found in header")
        return names.index(response_col)
    idx = int(response_col)
    if not -width <= idx < width:
        raise DimensionMismatchError(f"Response column {idx} out of range for {width} columns")
    return idx % width


def load_dataset(
    path: Path,
    response_col: Optional[Union[int, str]] = None,
    response_path: Optional[Path] = None,
    header: bool = False,
) -> Dataset:
    """Load a Dataset from CSV (row = observation, '.' decimal point).

    The response is either one column of `path` (`response_col`, index or
    header name) or a separate single-column file `response_path`.
    """
    if (response_col is None) == (response_path is None):
        raise DataError("Exactly one of response_col or response_path must be given")

    values, names = _read_matrix(Path(path), header)
    if response_path is not None:
        response, _ = _read_matrix(Path(response_path), header)
        if response.shape[1] != 1:
            raise DimensionMismatchError(
                f"Response file must have one column, got {response.shape[1]}"
            )
        if response.shape[0] != values.shape[0]:
            raise DimensionMismatchError(
                f"Design has {values.shape[0]} rows but response has {response.shape[0]}"
            )
        X, Y = values, response[:, 0]
    else:
        idx = _column_index(response_col, names, values.shape[1])
        if values.shape[1] < 2:
            raise DimensionMismatchError("Need at least one covariate besides the response")
        Y = values[:, idx]
        X = np.delete(values, idx, axis=1)

    data = Dataset(X, Y)
    info(f"Loaded dataset from {path}: n={data.n}, p={data.p}")
    return data


def load_signal(path: Path, header: bool = False) -> np.ndarray:
    """Load a single-column CSV signal (segmentation input)."""
    values, _ = _read_matrix(Path(path), header)
    if values.shape[1] != 1:
        raise DimensionMismatchError(f"Signal file must have one column, got {values.shape[1]}")
    if not np.all(np.isfinite(values)):
        raise DataError("Signal contains non-finite entries")
    debug(f"Loaded signal of length {values.shape[0]} from {path}")
    return values[:, 0]
