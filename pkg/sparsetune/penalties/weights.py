"""Complexity weights Delta(S) of the candidate model collections."""

import math

from sparsetune.errors import DomainError
from sparsetune.penalties.special import log_binomial


def delta_coordinate(p: int, dim: int) -> float:
    """log C(p, dim) + log(dim) for coordinate-sparse spaces."""
    if not (1 <= dim <= p):
        raise DomainError(f"delta_coordinate needs 1 <= dim <= p, got dim={dim}, p={p}")
    return log_binomial(p, dim) + math.log(dim)


def delta_group(M: int, kcard: int) -> float:
    """log(|K|) + log C(M, |K|) for unions of |K| groups out of M."""
    if not (1 <= kcard <= M):
        raise DomainError(f"delta_group needs 1 <= |K| <= M, got |K|={kcard}, M={M}")
    return math.log(kcard) + log_binomial(M, kcard)
