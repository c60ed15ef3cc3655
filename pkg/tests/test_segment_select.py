import math

import numpy as np
import pytest

from sparsetune.errors import DomainError
from sparsetune.segmentation.dp import segment_means
from sparsetune.segmentation.select import (
    default_bgh_qmax,
    segment_select_bgh,
    segment_select_lebarbier,
    segment_select_slope,
    tv_linselect_select,
    variance_plugin,
)
from sparsetune.selection.report import FLAG_ODD_LENGTH, FLAG_ZERO_RSS


def _step_signal(seed=0, n=100, jump=10.0):
    rng = np.random.default_rng(seed)
    return np.where(np.arange(n) >= n // 2, jump, 0.0) + rng.standard_normal(n)


def test_bgh_finds_a_strong_step():
    seg = segment_select_bgh(_step_signal())
    assert 50 in seg.breakpoints
    assert seg.q <= 3
    assert seg.method == "bgh"
    assert set(seg.criterion) <= set(range(default_bgh_qmax(100) + 1))


def test_bgh_exact_fit_wins_outright():
    y = np.repeat([0.0, 5.0], 10)
    seg = segment_select_bgh(y, q_max=4)
    assert seg.breakpoints == (10,)
    assert FLAG_ZERO_RSS in seg.flags
    assert seg.criterion[1] == 0.0


def test_bgh_domain():
    with pytest.raises(DomainError):
        segment_select_bgh(np.arange(10.0), q_max=3)


def test_difference_variance():
    assert variance_plugin([0.0, 2.0, 1.0, 1.0]) == (1.0, ())
    value, flags = variance_plugin([1.0, 3.0, 2.0, 2.0, 5.0])
    assert value == pytest.approx(1.0)
    assert flags == (FLAG_ODD_LENGTH,)
    with pytest.raises(DomainError):
        variance_plugin([1.0])


def test_lebarbier_criterion():
    y = _step_signal(seed=1)
    seg = segment_select_lebarbier(y, q_max=6, sigma2=1.0)
    assert 50 in seg.breakpoints
    q = 2
    expected = seg.rss_by_q[q] + (q + 1) * (2 * math.log(100 / (q + 1)) + 5)
    assert seg.criterion[q] == pytest.approx(expected)
    assert seg.extras["sigma2"] == 1.0


def test_lebarbier_plugs_in_the_variance():
    y = _step_signal(seed=2, n=51)
    seg = segment_select_lebarbier(y, q_max=5)
    assert FLAG_ODD_LENGTH in seg.flags
    assert seg.extras["sigma2"] == pytest.approx(variance_plugin(y)[0])


def test_slope_segmentation():
    seg = segment_select_slope(_step_signal(seed=3))
    assert seg.method == "slope"
    assert seg.q in seg.criterion
    assert seg.extras["kappa_hat"] > 0
    np.testing.assert_allclose(seg.fitted, segment_means(seg.fitted, seg.breakpoints))


def test_tv_linselect_refits_segment_means():
    y = _step_signal(seed=4)
    seg = tv_linselect_select(y, size=30, ratio=1e-2)
    assert 50 in seg.breakpoints
    np.testing.assert_allclose(seg.fitted, segment_means(y, seg.breakpoints))
    r = y - seg.fitted
    assert seg.rss == pytest.approx(float(r @ r))
    assert seg.method == "tv+linselect"


def _three_level_signal(seed, n=40):
    rng = np.random.default_rng(seed)
    levels = np.repeat([0.0, 3.0, -2.0], [15, 10, n - 25])
    return levels + 0.7 * rng.standard_normal(n)


@pytest.mark.parametrize("seed", range(10))
def test_selectors_follow_a_level_shift(seed):
    y = _three_level_signal(seed)
    shift = 3.7
    for select in (segment_select_bgh, segment_select_lebarbier, segment_select_slope):
        base = select(y)
        moved = select(y + shift)
        assert moved.breakpoints == base.breakpoints
        np.testing.assert_allclose(moved.fitted, base.fitted + shift, atol=1e-9)


@pytest.mark.parametrize("seed", range(50))
@pytest.mark.parametrize("scale", [0.1, 3.0])
def test_bgh_choice_is_scale_free(seed, scale):
    y = _three_level_signal(seed)
    base = segment_select_bgh(y)
    scaled = segment_select_bgh(scale * y)
    assert scaled.breakpoints == base.breakpoints
    np.testing.assert_allclose(scaled.fitted, scale * base.fitted, atol=1e-9)


@pytest.mark.slow
def test_bgh_keeps_pure_noise_flat():
    flat = sum(
        segment_select_bgh(np.random.default_rng(seed).standard_normal(60)).q == 0
        for seed in range(100)
    )
    assert flat >= 90


@pytest.mark.slow
def test_bgh_finds_a_single_large_gap():
    step = np.concatenate([np.zeros(30), 10.0 * np.ones(30)])
    single = sum(
        segment_select_bgh(step + np.random.default_rng(seed).standard_normal(60)).q == 1
        for seed in range(100)
    )
    assert single >= 95
