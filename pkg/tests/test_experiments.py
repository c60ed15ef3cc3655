import math
import time

import numpy as np
import pytest

from sparsetune.errors import ConfigurationError, DomainError
from sparsetune.simulation.experiments import (
    ExperimentOptions,
    RepOutcome,
    bic_demo_grid,
    risk_ratio,
    run_bic_demo,
    run_experiment1,
    run_experiment2,
)
from sparsetune.simulation.instances import SimConfig

OPTIONS = ExperimentOptions(grid_size=10, grid_ratio=0.05, cv_folds=3)
SMALL = SimConfig(n=30, p=20, k=2, magnitude=2.0, reps=2, seed=1)


def test_options_validation():
    assert ExperimentOptions.from_dict({"grid_size": 5}).grid_size == 5
    with pytest.raises(ConfigurationError):
        ExperimentOptions.from_dict({"folds": 5})
    with pytest.raises(ConfigurationError):
        ExperimentOptions(cv_folds=1)
    with pytest.raises(ConfigurationError):
        ExperimentOptions(grid_ratio=1.0)


def test_risk_ratio():
    assert risk_ratio(3.0, 2.0) == 1.5
    assert risk_ratio(0.0, 0.0) == 1.0
    assert risk_ratio(1.0, 0.0) == math.inf


def test_failed_method_is_recorded():
    outcome = RepOutcome(setting=0, rep=7)

    def broken():
        raise DomainError("bad level")

    assert outcome.attempt("sqrt-lasso", broken) is None
    assert outcome.attempt("ok", lambda: 3) == 3
    (failure,) = outcome.failures
    assert (failure.rep, failure.method, failure.error) == (7, "sqrt-lasso", "domain_error")
    assert set(outcome.timings) == {"sqrt-lasso", "ok"}


def test_experiment1_samples():
    report = run_experiment1(SMALL, OPTIONS, max_workers=1)
    assert set(report.samples) == {"lasso-cv", "lasso-linselect", "sqrt-lasso"}
    for method in ("lasso-cv", "lasso-linselect"):
        ratios = report.samples[method]["risk_ratio"]
        assert len(ratios) == 2
        assert all(r >= 1.0 - 1e-9 for r in ratios)
    assert report.config["options"]["cv_folds"] == 3


def test_experiment1_is_reproducible():
    first = run_experiment1(SMALL, OPTIONS, max_workers=1)
    second = run_experiment1(SMALL, OPTIONS, max_workers=1)
    assert first.samples == second.samples


def test_worker_count_does_not_change_results():
    serial = run_experiment2(SMALL, OPTIONS, max_workers=1)
    pooled = run_experiment2(SMALL, OPTIONS, max_workers=2)
    assert serial.samples == pooled.samples


def test_experiment2_metrics_and_pooling():
    settings = [SMALL, SimConfig(n=30, p=20, k=1, reps=1, seed=2)]
    report = run_experiment2(settings, OPTIONS, max_workers=1)
    assert len(report.config["settings"]) == 2
    for method in ("gauss-lasso-cv", "gauss-lasso-linselect", "sqrt-lasso"):
        metrics = report.samples[method]
        assert len(metrics["fdr"]) == 3
        assert all(0.0 <= v <= 1.0 for v in metrics["fdr"] + metrics["power"])


def test_no_settings():
    with pytest.raises(ConfigurationError):
        run_experiment1([], OPTIONS)


def test_bic_demo_grid_is_truncated():
    y = np.arange(1.0, 11.0)
    assert len(bic_demo_grid("hard", y)) == 6
    assert len(bic_demo_grid("soft", y, max_support=2)) == 3


def test_bic_demo_small():
    report = run_bic_demo(n=40, reps=3, seed=5, max_workers=1)
    assert set(report.samples) == {"lasso-bic", "scad-bic", "hard-bic"}
    for metrics in report.samples.values():
        assert len(metrics["support_size"]) == 3
        assert all(0 <= s <= 20 for s in metrics["support_size"])
        assert all(r >= 0 for r in metrics["risk"])


def test_bic_overfits_hard_thresholding_on_noise():
    report = run_bic_demo(n=200, reps=50, seed=0, max_workers=1)
    mean = {m: np.mean(v["support_size"]) for m, v in report.samples.items()}
    assert mean["hard-bic"] > 5.0
    assert mean["lasso-bic"] < mean["hard-bic"]


@pytest.mark.slow
def test_bic_overfitting_at_scale():
    report = run_bic_demo(n=2000, reps=50, seed=0, max_workers=4)
    support = {m: np.mean(v["support_size"]) for m, v in report.samples.items()}
    risk = {m: np.mean(v["risk"]) for m, v in report.samples.items()}
    assert support["lasso-bic"] < 0.5
    assert risk["lasso-bic"] < 1.0
    assert support["hard-bic"] > 5.0
    assert risk["hard-bic"] > 20.0 * max(risk["lasso-bic"], 1e-12)
    assert support["lasso-bic"] < support["scad-bic"]


SQUARE = SimConfig(n=100, p=100, k=5, design="iid-gaussian", reps=100, seed=0)


@pytest.mark.slow
def test_single_square_repetition_is_fast():
    start = time.perf_counter()
    run_experiment1(SimConfig(n=100, p=100, k=5, reps=1, seed=0), max_workers=1)
    assert time.perf_counter() - start < 20.0


@pytest.mark.slow
def test_experiment1_ranks_fixed_level_last():
    report = run_experiment1(SQUARE, max_workers=4)
    median = {m: np.median(v["risk_ratio"]) for m, v in report.samples.items()}
    assert median["sqrt-lasso"] > median["lasso-cv"]
    assert median["sqrt-lasso"] > median["lasso-linselect"]
    for method in ("lasso-cv", "lasso-linselect"):
        assert 1.0 <= median[method] <= 2.0


@pytest.mark.slow
def test_experiment2_cross_validation_has_the_most_false_discoveries():
    report = run_experiment2(SQUARE, max_workers=4)
    fdr = {m: np.mean(v["fdr"]) for m, v in report.samples.items()}
    assert fdr["gauss-lasso-cv"] > fdr["gauss-lasso-linselect"]
    assert fdr["gauss-lasso-cv"] > fdr["sqrt-lasso"]
