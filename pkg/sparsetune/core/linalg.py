"""Orthogonal projections onto column spans and the prediction loss."""

from typing import Iterable, Optional

import numpy as np

from sparsetune.errors import DimensionMismatchError
from sparsetune.settings import RANK_TOL


def _columns(X: np.ndarray, columns: Optional[Iterable[int]]) -> np.ndarray:
    if columns is None:
        return X
    idx = np.asarray(list(columns), dtype=int)
    return X[:, idx]


def orthonormal_basis(
    X: np.ndarray, columns: Optional[Iterable[int]] = None, tol: float = RANK_TOL
) -> np.ndarray:
    """Orthonormal basis (n x rank) of range(X_J), rank cut at tol * largest singular value."""
    XJ = _columns(np.asarray(X, dtype=float), columns)
    n = XJ.shape[0]
    if XJ.shape[1] == 0:
        return np.zeros((n, 0))
    U, s, _ = np.linalg.svd(XJ, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((n, 0))
    rank = int(np.sum(s > tol * s[0]))
    return U[:, :rank]


def rank_of(X: np.ndarray, columns: Optional[Iterable[int]] = None, tol: float = RANK_TOL) -> int:
    return orthonormal_basis(X, columns, tol).shape[1]


def project_with_basis(Q: np.ndarray, v: np.ndarray) -> np.ndarray:
    if Q.shape[1] == 0:
        return np.zeros_like(v, dtype=float)
    return Q @ (Q.T @ v)


def project_onto(
    X: np.ndarray, columns: Optional[Iterable[int]], v: np.ndarray, tol: float = RANK_TOL
) -> np.ndarray:
    """Return the orthogonal projection of v onto range(X_J).

    An empty column subset projects onto {0}. Rank-deficient X_J is handled
    through the SVD basis of its actual range.
    """
    v = np.asarray(v, dtype=float)
    if v.shape[0] != np.shape(X)[0]:
        raise DimensionMismatchError(f"Vector of length {v.shape[0]} vs X with {np.shape(X)[0]} rows")
    return project_with_basis(orthonormal_basis(X, columns, tol), v)


def projector_matrix(X: np.ndarray, columns: Optional[Iterable[int]] = None, tol: float = RANK_TOL) -> np.ndarray:
    Q = orthonormal_basis(X, columns, tol)
    return Q @ Q.T


def prediction_loss(X: np.ndarray, beta_hat: np.ndarray, beta0: np.ndarray) -> float:
    """Squared prediction loss ||X(beta_hat - beta0)||^2."""
    X = np.asarray(X, dtype=float)
    beta_hat = np.asarray(beta_hat, dtype=float).reshape(-1)
    beta0 = np.asarray(beta0, dtype=float).reshape(-1)
    if beta_hat.shape != beta0.shape or X.shape[1] != beta_hat.shape[0]:
        raise DimensionMismatchError(
            f"Shapes do not agree: X {X.shape}, beta_hat {beta_hat.shape}, beta0 {beta0.shape}"
        )
    diff = X @ (beta_hat - beta0)
    return float(diff @ diff)
