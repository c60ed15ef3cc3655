"""Oracle tuning, support metrics and Monte-Carlo summaries."""

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Tuple

import numpy as np

from sparsetune.core.dataset import Support
from sparsetune.core.linalg import prediction_loss
from sparsetune.estimators.results import EstimatorPath
from sparsetune.logger import info
from sparsetune.simulation.instances import SimTruth

QUANTILES = (0.0, 0.25, 0.5, 0.75, 0.9, 0.95)


class OracleChoice(NamedTuple):
    index: int
    lam: Any
    loss: float


def oracle_lambda(path: EstimatorPath, truth: SimTruth, X: np.ndarray) -> OracleChoice:
    """Grid point with the smallest true loss ||X(beta_hat - beta0)||^2 (first one on ties)."""
    losses = [prediction_loss(X, fit.beta, truth.beta0) for fit in path]
    best = int(np.argmin(losses))
    return OracleChoice(best, path[best].lam, float(losses[best]))


def fdr_power(selected: Support, truth: Support) -> Tuple[float, float]:
    """False-discovery and true-discovery proportions; both 0 for an empty selection."""
    chosen = set(selected)
    true = set(truth)
    fdr = len(chosen - true) / max(len(chosen), 1)
    power = len(chosen & true) / max(len(true), 1)
    return fdr, power


def summarize(samples: List[float]) -> Dict[str, Any]:
    """Mean, standard deviation, standard error and quantiles of sorted samples."""
    values = np.sort(np.asarray(samples, dtype=float))
    if values.size == 0:
        return {"count": 0}
    sd = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    return {
        "count": int(values.size),
        "mean": float(np.mean(values)),
        "sd": sd,
        "se": sd / math.sqrt(values.size),
        "quantiles": {
            f"{int(q * 100)}%": float(v) for q, v in zip(QUANTILES, np.quantile(values, QUANTILES))
        },
    }


@dataclass(frozen=True)
class Failure:
    rep: int
    method: str
    error: str
    message: str

    def to_dict(self) -> Dict[str, Any]:
        return {"rep": self.rep, "method": self.method, "error": self.error, "message": self.message}


@dataclass
class MetricsReport:
    """Per-method samples of each metric, in repetition order."""

    experiment: str
    config: Dict[str, Any]
    samples: Dict[str, Dict[str, List[float]]] = field(default_factory=dict)
    failures: List[Failure] = field(default_factory=list)
    extras: Dict[str, Any] = field(default_factory=dict)

    def add(self, method: str, metric: str, value: float) -> None:
        self.samples.setdefault(method, {}).setdefault(metric, []).append(float(value))

    def summary(self) -> Dict[str, Dict[str, Dict[str, Any]]]:
        return {
            method: {metric: summarize(values) for metric, values in sorted(metrics.items())}
            for method, metrics in sorted(self.samples.items())
        }

    def failure_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for failure in self.failures:
            counts[failure.method] = counts.get(failure.method, 0) + 1
        return counts

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment": self.experiment,
            "config": dict(self.config),
            "summary": self.summary(),
            "samples": self.samples,
            "failures": [f.to_dict() for f in self.failures],
            "failure_counts": self.failure_counts(),
            "extras": dict(self.extras),
        }

    def to_csv(self, path: Path) -> None:
        """Raw samples as rows (method, metric, index, value)."""
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["method", "metric", "index", "value"])
            for method, metrics in sorted(self.samples.items()):
                for metric, values in sorted(metrics.items()):
                    for i, value in enumerate(values):
                        writer.writerow([method, metric, i, repr(value)])
        info(f"Raw samples written to {path}")
