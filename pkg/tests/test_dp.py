from itertools import combinations

import numpy as np
import pytest

from sparsetune.errors import DomainError
from sparsetune.segmentation.dp import dp_best_partitions, segment_costs, segment_means


def _brute_force(y, q):
    best = None
    for bps in combinations(range(1, y.size), q):
        r = y - segment_means(y, bps)
        cost = float(r @ r)
        if best is None or cost < best[0] - 1e-12:
            best = (cost, bps)
    return best


@pytest.mark.parametrize("seed", range(50))
def test_matches_exhaustive_search(seed):
    y = np.random.default_rng(seed).standard_normal(12)
    family = dp_best_partitions(y, 3)
    for q in range(4):
        cost, bps = _brute_force(y, q)
        assert family.rss[q] == pytest.approx(cost)
        assert family.breakpoints[q] == bps


def test_rss_decreases_with_breakpoints(rng):
    y = rng.standard_normal(30)
    family = dp_best_partitions(y, 8)
    values = [family.rss[q] for q in range(9)]
    assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))
    assert family.q_max == 8


def test_step_signal_is_cut_at_the_step():
    y = np.concatenate([np.zeros(6), 4.0 * np.ones(4)])
    seg = dp_best_partitions(y, 2).segmentation(1)
    assert seg.breakpoints == (6,)
    assert seg.rss == pytest.approx(0.0)
    assert seg.segments() == [(0, 6), (6, 10)]


def test_segment_costs_table(rng):
    y = rng.standard_normal(6)
    D = segment_costs(y)
    for i in range(6):
        for j in range(i + 1, 7):
            seg = y[i:j]
            assert D[i, j] == pytest.approx(float(np.sum((seg - seg.mean()) ** 2)), abs=1e-12)
    assert D[3, 3] == np.inf


def test_invalid_requests():
    with pytest.raises(DomainError):
        dp_best_partitions(np.ones(5), 5)
    with pytest.raises(DomainError):
        dp_best_partitions([1.0, np.nan], 1)
    with pytest.raises(DomainError):
        segment_means(np.ones(5), [0])
