"""Seeded regression instances: design families, planted coefficients and Gaussian noise."""

import math
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from scipy.linalg import cholesky, toeplitz

from sparsetune.core.dataset import Dataset, Support
from sparsetune.errors import ConfigurationError
from sparsetune.settings import SIM_MAGNITUDE

IDENTITY = "identity"
IID_GAUSSIAN = "iid-gaussian"
TOEPLITZ = "toeplitz"
DESIGN_FAMILIES = (IDENTITY, IID_GAUSSIAN, TOEPLITZ)

# signal strengths, in units of sigma sqrt(2 log p) over the median column norm
MAGNITUDE_GRID = (0.5, 1.0, 2.0, 4.0)


@dataclass(frozen=True)
class SimConfig:
    """One simulation setting.

    Nonzero coefficients have absolute value magnitude * sigma * sqrt(2 log p)
    divided by the median column norm, with random signs.
    """

    n: int
    p: int
    design: str = IID_GAUSSIAN
    k: int = 5
    magnitude: float = SIM_MAGNITUDE
    sigma: float = 1.0
    reps: int = 100
    seed: int = 0
    rho: float = 0.5
    normalize: bool = True

    def __post_init__(self):
        if self.design not in DESIGN_FAMILIES:
            raise ConfigurationError(
                f"Unknown design family {self.design!r}; expected one of {DESIGN_FAMILIES}"
            )
        if self.n < 2 or self.p < 1:
            raise ConfigurationError(f"Need n >= 2 and p >= 1, got n={self.n}, p={self.p}")
        if not 0 <= self.k <= self.p:
            raise ConfigurationError(f"Need 0 <= k <= p, got k={self.k}, p={self.p}")
        if not self.sigma > 0:
            raise ConfigurationError(f"sigma must be positive, got {self.sigma}")
        if self.reps < 1:
            raise ConfigurationError(f"reps must be >= 1, got {self.reps}")
        if self.design == IDENTITY and self.n != self.p:
            raise ConfigurationError("The identity design needs n == p")
        if self.design == TOEPLITZ and not -1 < self.rho < 1:
            raise ConfigurationError(f"Toeplitz correlation must lie in (-1, 1), got {self.rho}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "SimConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(payload) - known
        if unknown:
            raise ConfigurationError(f"Unknown simulation settings: {sorted(unknown)}")
        return cls(**payload)


def magnitude_grid(
    config: SimConfig, magnitudes: Sequence[float] = MAGNITUDE_GRID
) -> List[SimConfig]:
    return [replace(config, magnitude=float(m)) for m in magnitudes]


@dataclass(frozen=True, eq=False)
class SimTruth:
    beta0: np.ndarray
    support0: Support

    def to_dict(self) -> Dict[str, Any]:
        return {"beta0": self.beta0.tolist(), "support0": self.support0.to_list()}


def rep_rng(seed: int, rep: int) -> np.random.Generator:
    """Independent substream for one repetition."""
    return np.random.default_rng([seed, rep])


def derived_seed(seed: int, rep: int, stream: int) -> int:
    """Integer seed for a secondary random consumer (fold shuffles) of one repetition."""
    return int(np.random.SeedSequence([seed, rep, stream]).generate_state(1)[0])


def design_matrix(config: SimConfig, rng: np.random.Generator) -> np.ndarray:
    if config.design == IDENTITY:
        return np.eye(config.n)
    Z = rng.standard_normal((config.n, config.p))
    if config.design == TOEPLITZ:
        sigma = toeplitz(config.rho ** np.arange(config.p))
        Z = Z @ cholesky(sigma, lower=False)
    if config.normalize:
        Z = Z / np.linalg.norm(Z, axis=0)
    return Z


def generate_instance(config: SimConfig, rep: int) -> Tuple[Dataset, SimTruth]:
    """Draw (X, Y) and the planted coefficients for repetition `rep`."""
    rng = rep_rng(config.seed, rep)
    X = design_matrix(config, rng)
    beta0 = np.zeros(config.p)
    support = np.sort(rng.choice(config.p, size=config.k, replace=False))
    if config.k:
        unit = config.sigma * math.sqrt(2.0 * math.log(max(config.p, 2)))
        unit /= float(np.median(np.linalg.norm(X, axis=0)))
        signs = rng.choice([-1.0, 1.0], size=config.k)
        beta0[support] = config.magnitude * unit * signs
    Y = X @ beta0 + config.sigma * rng.standard_normal(config.n)
    return Dataset(X, Y), SimTruth(beta0, Support(tuple(support.tolist())))
