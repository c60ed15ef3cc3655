from itertools import combinations
import math

import numpy as np
import pytest

from sparsetune.core.dataset import Dataset
from sparsetune.errors import DomainError, UnsupportedSizeError
from sparsetune.selection.exhaustive import (
    bgh_select_exhaustive,
    bm_select_exhaustive,
    lb_aggregate_exhaustive,
    minimax_kstar,
)


@pytest.mark.parametrize("n, p, expected", [(12, 10, 2), (20, 10, 10), (5, 10, 0)])
def test_minimax_kstar(n, p, expected):
    assert minimax_kstar(n, p) == expected


def _rss(X, J, Y):
    coef, *_ = np.linalg.lstsq(X[:, list(J)], Y, rcond=None)
    r = Y - X[:, list(J)] @ coef
    return float(r @ r)


def test_birge_massart_matches_brute_force(instance_factory):
    data, _ = instance_factory(20, 6, k=2, seed=11)
    sigma2 = 1.0
    kstar = minimax_kstar(data.n, data.p)
    candidates = []
    for size in range(1, min(kstar, data.p - 1) + 1):
        for J in combinations(range(data.p), size):
            pen = 4 * size * (4 + math.log(data.p / size)) * sigma2
            candidates.append((_rss(data.X, J, data.Y) + pen, size, J))
    full = tuple(range(data.p))
    candidates.append((_rss(data.X, full, data.Y) + 2 * data.n * sigma2, data.p, full))
    best = min(candidates, key=lambda c: (c[0], c[1]))

    report = bm_select_exhaustive(data, sigma2)
    assert report.chosen_space == best[2]
    assert report.chosen.crit == pytest.approx(best[0])
    assert len(report.rows) == len(candidates)


def test_aggregation_weights(instance_factory):
    data, _ = instance_factory(20, 5, k=1, seed=2)
    agg = lb_aggregate_exhaustive(data, 1.0)
    assert agg.weights.sum() == pytest.approx(1.0)
    assert np.all(agg.weights >= 0)
    assert agg.models[-1] == tuple(range(5))


def test_aggregation_limits(instance_factory):
    data, _ = instance_factory(20, 5, k=1, seed=2)
    vague = lb_aggregate_exhaustive(data, 1e12)
    np.testing.assert_allclose(vague.weights, vague.prior_limit(), atol=1e-6)
    sharp = lb_aggregate_exhaustive(data, 1e-6)
    assert int(np.argmax(sharp.weights)) == len(sharp.models) - 1


def test_vague_limit_keeps_the_dimension_factor(instance_factory):
    data, _ = instance_factory(20, 5, k=1, seed=2)
    kstar = minimax_kstar(20, 5)
    log_w = np.array(
        [
            -len(m) / 2.0
            if m == tuple(range(5))
            else -len(m) / 2.0 - math.log(kstar) - math.log(math.comb(5, len(m)))
            for m in lb_aggregate_exhaustive(data, 1.0).models
        ]
    )
    expected = np.exp(log_w) / np.exp(log_w).sum()
    np.testing.assert_allclose(lb_aggregate_exhaustive(data, 1e12).prior_limit(), expected, rtol=1e-10)


def test_bgh_respects_the_size_bound(instance_factory):
    data, _ = instance_factory(9, 6, k=1, seed=1)
    report = bgh_select_exhaustive(data)
    assert report.extras["max_size"] == 2
    assert max(row.size for row in report.rows) <= 2


def test_size_and_variance_guards(rng):
    wide = Dataset(rng.standard_normal((30, 13)), rng.standard_normal(30))
    with pytest.raises(UnsupportedSizeError):
        bm_select_exhaustive(wide, 1.0)
    with pytest.raises(UnsupportedSizeError):
        lb_aggregate_exhaustive(wide, 1.0)
    with pytest.raises(UnsupportedSizeError):
        bgh_select_exhaustive(wide)
    narrow = Dataset(rng.standard_normal((30, 4)), rng.standard_normal(30))
    with pytest.raises(DomainError):
        bm_select_exhaustive(narrow, 0.0)
