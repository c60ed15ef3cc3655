"""Monte-Carlo experiments.

Experiment 1 compares 10-fold CV, LinSelect and the fixed-level square-root
Lasso for tuning the Lasso, by the ratio of each selected fit's prediction
loss to the best loss on the Lasso grid. Experiment 2 does the same for the
Gauss-Lasso and reports false-discovery proportion and power. The BIC demo
tunes soft, SCAD and hard thresholding by modified BIC on pure noise.

Repetitions run in a process pool; each one draws from its own (seed, rep)
substream and results are merged in (setting, rep) order, so the report does
not depend on the worker count.
"""

import math
import multiprocessing as mp
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np

from sparsetune.core.dataset import Dataset
from sparsetune.core.linalg import prediction_loss
from sparsetune.errors import ConfigurationError, SparseTuneError
from sparsetune.estimators.lasso import lasso_path
from sparsetune.estimators.refit import gauss_lasso_path
from sparsetune.estimators.results import FitResult
from sparsetune.estimators.scaled import default_sqrt_lambda, sqrt_lasso_fit
from sparsetune.estimators.thresholding import default_threshold_grid, threshold_path
from sparsetune.logger import info, scoped, warning
from sparsetune.selection.criteria import modified_bic_select_n
from sparsetune.selection.crossval import (
    gauss_lasso_path_factory,
    lasso_path_factory,
    vfold_cv_select,
)
from sparsetune.selection.linselect import build_collection_coordinate, linselect_select
from sparsetune.settings import (
    LINSELECT_PEN_MULTIPLIER,
    SIM_CV_FOLDS,
    SIM_GRID_RATIO,
    SIM_GRID_SIZE,
    SIM_WORKERS,
)
from sparsetune.simulation.instances import (
    IDENTITY,
    SimConfig,
    derived_seed,
    generate_instance,
    rep_rng,
)
from sparsetune.simulation.metrics import Failure, MetricsReport, fdr_power, oracle_lambda

EXPERIMENT_1 = "1"
EXPERIMENT_2 = "2"
BIC_DEMO = "bic-demo"
EXPERIMENTS = (EXPERIMENT_1, EXPERIMENT_2, BIC_DEMO)

BIC_DEMO_N = 2000
BIC_DEMO_FULL_N = 10000
BIC_DEMO_REPS = 200
# larger supports are never selected under the null; keeps paths small at n = 10^4
BIC_DEMO_MAX_SUPPORT = 1000
BIC_DEMO_METHODS = (("soft", "lasso-bic"), ("scad", "scad-bic"), ("hard", "hard-bic"))

# substream index of the fold shuffle within a repetition
CV_STREAM = 1

T = TypeVar("T")
Settings = Union[SimConfig, Sequence[SimConfig]]


@dataclass(frozen=True)
class ExperimentOptions:
    grid_size: int = SIM_GRID_SIZE
    grid_ratio: float = SIM_GRID_RATIO
    cv_folds: int = SIM_CV_FOLDS
    multiplier: float = LINSELECT_PEN_MULTIPLIER

    def __post_init__(self):
        if self.grid_size < 1 or not 0 < self.grid_ratio < 1:
            raise ConfigurationError(
                f"Need grid_size >= 1 and 0 < grid_ratio < 1, got {self.grid_size}, {self.grid_ratio}"
            )
        if self.cv_folds < 2:
            raise ConfigurationError(f"Need at least 2 folds, got {self.cv_folds}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "ExperimentOptions":
        unknown = set(payload) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigurationError(f"Unknown experiment options: {sorted(unknown)}")
        return cls(**payload)


@dataclass
class RepOutcome:
    """Metric values and failures of one repetition of one setting."""

    setting: int
    rep: int
    values: List[Tuple[str, str, float]] = field(default_factory=list)
    failures: List[Failure] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)

    def attempt(self, method: str, compute: Callable[[], T]) -> Optional[T]:
        """Run one method; a library error becomes a recorded failure."""
        start = time.perf_counter()
        try:
            return compute()
        except SparseTuneError as e:
            scoped(f"setting {self.setting} rep {self.rep}").warning(f"{method} failed: {e}")
            self.failures.append(Failure(self.rep, method, e.code, str(e)))
            return None
        finally:
            self.timings[method] = self.timings.get(method, 0.0) + time.perf_counter() - start

    def record(self, method: str, metric: str, value: float) -> None:
        self.values.append((method, metric, float(value)))


def risk_ratio(loss: float, oracle_loss: float) -> float:
    if oracle_loss > 0:
        return loss / oracle_loss
    return 1.0 if loss == 0 else math.inf


def sqrt_lasso_on_normalized(data: Dataset) -> FitResult:
    """Square-root Lasso at 2 sqrt(2 log p), fitted on unit-norm columns and mapped back."""
    normalized, scale = data.normalized()
    fit = sqrt_lasso_fit(normalized, default_sqrt_lambda(data.p))
    return fit.in_original_scale(scale)


def _experiment1_rep(config: SimConfig, options: ExperimentOptions, setting: int, rep: int) -> RepOutcome:
    outcome = RepOutcome(setting, rep)
    data, truth = generate_instance(config, rep)
    path = outcome.attempt(
        "lasso-path", lambda: lasso_path(data, size=options.grid_size, ratio=options.grid_ratio)
    )
    if path is None:
        return outcome
    oracle = oracle_lambda(path, truth, data.X)

    def ratio(beta: np.ndarray) -> float:
        return risk_ratio(prediction_loss(data.X, beta, truth.beta0), oracle.loss)

    factory = lasso_path_factory(options.grid_size, options.grid_ratio)
    cv = outcome.attempt(
        "lasso-cv",
        lambda: vfold_cv_select(
            factory,
            data,
            V=options.cv_folds,
            seed=derived_seed(config.seed, rep, CV_STREAM),
            path=path,
        ),
    )
    if cv is not None:
        outcome.record("lasso-cv", "risk_ratio", ratio(path[cv.chosen_index].beta))

    linselect = outcome.attempt(
        "lasso-linselect",
        lambda: linselect_select(
            path,
            build_collection_coordinate(path, data, options.multiplier),
            data,
            options.multiplier,
        ),
    )
    if linselect is not None:
        outcome.record("lasso-linselect", "risk_ratio", ratio(path[linselect.chosen_index].beta))

    scaled = outcome.attempt("sqrt-lasso", lambda: sqrt_lasso_on_normalized(data))
    if scaled is not None:
        outcome.record("sqrt-lasso", "risk_ratio", ratio(scaled.beta))
    return outcome


def _experiment2_rep(config: SimConfig, options: ExperimentOptions, setting: int, rep: int) -> RepOutcome:
    outcome = RepOutcome(setting, rep)
    data, truth = generate_instance(config, rep)
    path = outcome.attempt(
        "lasso-path", lambda: lasso_path(data, size=options.grid_size, ratio=options.grid_ratio)
    )
    if path is None:
        return outcome
    gauss = outcome.attempt("gauss-lasso-path", lambda: gauss_lasso_path(path, data))
    if gauss is None:
        return outcome

    def support_metrics(method: str, fit: FitResult) -> None:
        fdr, power = fdr_power(fit.support, truth.support0)
        outcome.record(method, "fdr", fdr)
        outcome.record(method, "power", power)
        outcome.record(method, "support_size", fit.size)

    factory = gauss_lasso_path_factory(options.grid_size, options.grid_ratio)
    cv = outcome.attempt(
        "gauss-lasso-cv",
        lambda: vfold_cv_select(
            factory,
            data,
            V=options.cv_folds,
            seed=derived_seed(config.seed, rep, CV_STREAM),
            path=gauss,
        ),
    )
    if cv is not None:
        support_metrics("gauss-lasso-cv", gauss[cv.chosen_index])

    # the collection comes from the Lasso supports; the candidates are their refits
    linselect = outcome.attempt(
        "gauss-lasso-linselect",
        lambda: linselect_select(
            gauss,
            build_collection_coordinate(path, data, options.multiplier),
            data,
            options.multiplier,
            method="gauss-lasso-linselect",
        ),
    )
    if linselect is not None:
        support_metrics("gauss-lasso-linselect", gauss[linselect.chosen_index])

    scaled = outcome.attempt("sqrt-lasso", lambda: sqrt_lasso_on_normalized(data))
    if scaled is not None:
        support_metrics("sqrt-lasso", scaled)
    return outcome


def bic_demo_grid(kind: str, y: np.ndarray, max_support: int = BIC_DEMO_MAX_SUPPORT) -> np.ndarray:
    """Leading part of the thresholding grid: support sizes 0..min(n/2, max_support)."""
    limit = min(y.size // 2, max_support)
    return default_threshold_grid(kind, y)[: limit + 1]


def _bic_demo_rep(config: SimConfig, options: ExperimentOptions, setting: int, rep: int) -> RepOutcome:
    outcome = RepOutcome(setting, rep)
    # identity design and beta0 = 0: Y is pure noise and X is never formed
    y = config.sigma * rep_rng(config.seed, rep).standard_normal(config.n)
    for kind, method in BIC_DEMO_METHODS:

        def tune(kind: str = kind) -> FitResult:
            path = threshold_path(kind, y, grid=bic_demo_grid(kind, y))
            return path[modified_bic_select_n(path, config.n).chosen_index]

        fit = outcome.attempt(method, tune)
        if fit is not None:
            outcome.record(method, "support_size", fit.size)
            outcome.record(method, "risk", float(fit.beta @ fit.beta))
    return outcome


_REP_RUNNERS = {
    EXPERIMENT_1: _experiment1_rep,
    EXPERIMENT_2: _experiment2_rep,
    BIC_DEMO: _bic_demo_rep,
}


def _run_rep(
    experiment: str, config: SimConfig, options: ExperimentOptions, setting: int, rep: int
) -> RepOutcome:
    return _REP_RUNNERS[experiment](config, options, setting, rep)


def _resolve_workers(max_workers: Optional[int], task_count: int) -> int:
    if max_workers is None:
        max_workers = SIM_WORKERS
    return max(1, min(max_workers, task_count))


def _execute(
    experiment: str,
    configs: List[SimConfig],
    options: ExperimentOptions,
    max_workers: Optional[int],
) -> List[RepOutcome]:
    tasks = [(s, rep) for s, config in enumerate(configs) for rep in range(config.reps)]
    worker_count = _resolve_workers(max_workers, len(tasks))
    info(
        f"Experiment {experiment}: {len(tasks)} repetition(s) over {len(configs)} setting(s) "
        f"with {worker_count} worker(s)"
    )
    outcomes: Dict[Tuple[int, int], RepOutcome] = {}
    if worker_count == 1:
        for s, rep in tasks:
            outcomes[(s, rep)] = _run_rep(experiment, configs[s], options, s, rep)
    else:
        if os.name == "posix":
            context = mp.get_context("fork")
            executor = ProcessPoolExecutor(max_workers=worker_count, mp_context=context)
        else:
            executor = ProcessPoolExecutor(max_workers=worker_count)
        with executor:
            futures = {
                executor.submit(_run_rep, experiment, configs[s], options, s, rep): (s, rep)
                for s, rep in tasks
            }
            for future in as_completed(futures):
                s, rep = futures[future]
                try:
                    outcomes[(s, rep)] = future.result()
                except Exception as e:
                    scoped(f"setting {s} rep {rep}").error(f"Unexpected error: {e}")
                    raise
    return [outcomes[key] for key in sorted(outcomes)]


def _collect(
    experiment: str,
    configs: List[SimConfig],
    options: Optional[ExperimentOptions],
    outcomes: List[RepOutcome],
    extras: Optional[Dict[str, Any]] = None,
) -> MetricsReport:
    config: Dict[str, Any] = {"settings": [c.to_dict() for c in configs]}
    if options is not None:
        config["options"] = options.to_dict()
    report = MetricsReport(experiment=experiment, config=config, extras=dict(extras or {}))
    timings: Dict[str, float] = {}
    for outcome in outcomes:
        for method, metric, value in outcome.values:
            report.add(method, metric, value)
        report.failures.extend(outcome.failures)
        for method, seconds in outcome.timings.items():
            timings[method] = timings.get(method, 0.0) + seconds
    # wall-clock numbers stay out of the report
    for method, seconds in sorted(timings.items()):
        info(f"{method}: {seconds / max(len(outcomes), 1):.3g}s per repetition")
    if report.failures:
        warning(f"{len(report.failures)} failed method run(s): {report.failure_counts()}")
    return report


def _as_settings(configs: Settings) -> List[SimConfig]:
    settings = [configs] if isinstance(configs, SimConfig) else list(configs)
    if not settings:
        raise ConfigurationError("No simulation settings given")
    return settings


def run_experiment1(
    configs: Settings,
    options: Optional[ExperimentOptions] = None,
    max_workers: Optional[int] = None,
) -> MetricsReport:
    """Oracle risk ratios of Lasso-CV, Lasso-LinSelect and the square-root Lasso.

    Samples of all settings are pooled per method, in (setting, rep) order.
    """
    settings = _as_settings(configs)
    options = options or ExperimentOptions()
    outcomes = _execute(EXPERIMENT_1, settings, options, max_workers)
    return _collect(EXPERIMENT_1, settings, options, outcomes)


def run_experiment2(
    configs: Settings,
    options: Optional[ExperimentOptions] = None,
    max_workers: Optional[int] = None,
) -> MetricsReport:
    """False-discovery proportion and power of Gauss-Lasso-CV, Gauss-Lasso-LinSelect and the square-root Lasso."""
    settings = _as_settings(configs)
    options = options or ExperimentOptions()
    outcomes = _execute(EXPERIMENT_2, settings, options, max_workers)
    return _collect(EXPERIMENT_2, settings, options, outcomes)


def run_bic_demo(
    n: int = BIC_DEMO_N,
    reps: int = BIC_DEMO_REPS,
    seed: int = 0,
    sigma: float = 1.0,
    max_workers: Optional[int] = None,
) -> MetricsReport:
    """Support size and risk ||beta_hat||^2 of modified-BIC-tuned thresholding when beta0 = 0."""
    config = SimConfig(n=n, p=n, design=IDENTITY, k=0, sigma=sigma, reps=reps, seed=seed)
    outcomes = _execute(BIC_DEMO, [config], ExperimentOptions(), max_workers)
    return _collect(BIC_DEMO, [config], None, outcomes, {"max_support": BIC_DEMO_MAX_SUPPORT})
