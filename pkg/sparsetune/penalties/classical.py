"""Classical penalties: AIC, BIC, Birge-Massart and Lebarbier."""

import math
from enum import Enum
from typing import Optional, Union

from sparsetune.errors import ConfigurationError, DomainError
from sparsetune.settings import LEBARBIER_C1, LEBARBIER_C2


class PenaltyKind(str, Enum):
    AIC = "AIC"
    BIC = "BIC"
    BIRGE_MASSART = "BirgeMassart"
    LEBARBIER = "Lebarbier"

    @classmethod
    def parse(cls, kind: Union[str, "PenaltyKind"]) -> "PenaltyKind":
        if isinstance(kind, cls):
            return kind
        for member in cls:
            if member.value.lower() == str(kind).lower():
                return member
        raise ConfigurationError(f"Unknown penalty kind {kind!r}; expected one of {[m.value for m in cls]}")


KNOWN_VARIANCE_KINDS = (PenaltyKind.BIRGE_MASSART, PenaltyKind.LEBARBIER)


def classical_penalties(
    kind: Union[str, PenaltyKind],
    dim: Optional[int] = None,
    n: Optional[int] = None,
    p: Optional[int] = None,
    q: Optional[int] = None,
    sigma2: Optional[float] = None,
) -> float:
    """Scalar penalty of the given kind.

    AIC = 2 dim and BIC = dim log(n), both multiplied by sigma2 when given.
    BirgeMassart = 4 dim (4 + log(p/dim)) sigma2 (0 for dim = 0).
    Lebarbier = (q+1)(2 log(n/(q+1)) + 5) sigma2.
    """
    kind = PenaltyKind.parse(kind)
    if kind in KNOWN_VARIANCE_KINDS and sigma2 is None:
        raise ConfigurationError(f"{kind.value} penalty requires sigma2")
    scale = 1.0 if sigma2 is None else float(sigma2)
    if sigma2 is not None and sigma2 < 0:
        raise DomainError(f"sigma2 must be nonnegative, got {sigma2}")

    if kind is PenaltyKind.LEBARBIER:
        if q is None or n is None:
            raise ConfigurationError("Lebarbier penalty requires q and n")
        if not (0 <= q <= n - 1):
            raise DomainError(f"Need 0 <= q <= n-1, got q={q}, n={n}")
        return (q + 1) * (LEBARBIER_C1 * math.log(n / (q + 1)) + LEBARBIER_C2) * scale

    if dim is None:
        raise ConfigurationError(f"{kind.value} penalty requires dim")
    if dim < 0:
        raise DomainError(f"dim must be nonnegative, got {dim}")
    if kind is PenaltyKind.AIC:
        return 2.0 * dim * scale
    if kind is PenaltyKind.BIC:
        if n is None:
            raise ConfigurationError("BIC penalty requires n")
        return dim * math.log(n) * scale
    if p is None:
        raise ConfigurationError("BirgeMassart penalty requires p")
    if dim == 0:
        return 0.0
    if dim > p:
        raise DomainError(f"Need dim <= p, got dim={dim}, p={p}")
    return 4.0 * dim * (4.0 + math.log(p / dim)) * scale
