import math

import numpy as np
import pytest

from simocap.alloc import PowerAllocation, equal_power, optimal_allocation, waterfill
from simocap.channel import ParallelChannel, SubchannelSpec
from simocap.rates import exact_rate, jensen_upper


def test_waterfill_single_channel():
    alloc = waterfill([2.0], n0=1.0, p_total=3.0)
    assert np.allclose(alloc.powers, [3.0])
    assert math.isclose(alloc.water_level, 3.0 + 0.5, rel_tol=1e-15)


def test_waterfill_two_channel_hand_solution():
    alloc = waterfill([1.0, 2.0], n0=1.0, p_total=1.0)
    assert np.allclose(alloc.powers, [0.25, 0.75], rtol=0, atol=1e-12)
    assert abs(alloc.water_level - 1.25) <= 1e-12


def test_waterfill_with_inactive_channel():
    alloc = waterfill([1.0, 4.0, 0.1], n0=1.0, p_total=1.0)
    assert np.allclose(alloc.powers, [0.125, 0.875, 0.0], rtol=0, atol=1e-12)
    assert abs(alloc.water_level - 1.125) <= 1e-12


def test_waterfill_rejects_nonpositive_gains():
    with pytest.raises(ValueError):
        waterfill([1.0, 0.0], 1.0, 1.0)
    with pytest.raises(ValueError):
        waterfill([1.0, -2.0], 1.0, 1.0)


def test_waterfill_scale_invariance():
    gains = np.array([0.3, 1.1, 2.7, 0.9])
    a = waterfill(gains, n0=1.0, p_total=2.0)
    b = waterfill(gains * 7.5, n0=7.5, p_total=2.0)
    assert np.array_equal(a.powers, b.powers)


def test_waterfill_budget_and_complementary_slackness():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        n = int(rng.integers(1, 17))
        gains = 10 ** rng.uniform(-1, 1, size=n)
        n0 = 10 ** rng.uniform(-0.5, 0.5)
        p_total = 10 ** rng.uniform(-1, 1)
        alloc = waterfill(gains, n0, p_total)
        assert abs(alloc.total - p_total) <= 1e-12 * p_total
        nu = alloc.water_level
        thresholds = n0 / gains
        for p, t in zip(alloc.powers, thresholds):
            if p > 0.0:
                assert abs(p - (nu - t)) <= 1e-12 * max(1.0, nu)
            else:
                assert nu <= t * (1.0 + 1e-12)


def test_waterfill_ties_activate_together():
    alloc = waterfill([1.0, 1.0, 4.0], n0=1.0, p_total=0.9)
    assert alloc.powers[0] == alloc.powers[1]


def test_waterfill_beats_random_feasible_allocations():
    rng = np.random.default_rng(2)
    for _ in range(25):
        n = int(rng.integers(2, 9))
        mu = 10 ** rng.uniform(-1, 1, size=n)
        n0 = 1.0
        p_total = 10 ** rng.uniform(-0.5, 1)
        best = float(np.log1p(waterfill(mu, n0, p_total).powers * mu / n0).sum())
        candidates = rng.dirichlet(np.ones(n), size=1000) * p_total
        values = np.log1p(candidates * mu / n0).sum(axis=1)
        assert best >= values.max() - 1e-12


def test_equal_power_basics():
    alloc = equal_power(4, 1.0)
    assert np.array_equal(alloc.powers, np.full(4, 0.25))
    assert alloc.total == 1.0
    single = equal_power(1, 2.5)
    assert np.array_equal(single.powers, [2.5])
    with pytest.raises(ValueError):
        equal_power(0, 1.0)


def test_power_allocation_validation():
    with pytest.raises(ValueError):
        PowerAllocation(powers=np.array([1.0, -0.1]))
    with pytest.raises(ValueError):
        PowerAllocation(powers=np.array([[1.0]]))


def test_optimal_allocation_symmetric_channel_is_equal_power():
    sub = SubchannelSpec(theta=0.5, m=1.0, L=2)
    ch = ParallelChannel([sub, sub, sub], n0=1.0, p_total=3.0)
    alloc = optimal_allocation(ch)
    assert np.allclose(alloc.powers, 1.0, rtol=1e-6)
    assert math.isclose(alloc.total, 3.0, rel_tol=1e-12)


def test_optimal_allocation_matches_grid_search():
    ch = ParallelChannel(
        [SubchannelSpec(theta=1.0, m=1.0, L=2), SubchannelSpec(theta=0.25, m=1.0, L=2)],
        n0=1.0,
        p_total=1.0,
    )
    alloc = optimal_allocation(ch)
    grid = np.arange(0.0, 1.0 + 1e-12, 1e-3)
    best_p1, best_val = 0.0, -math.inf
    for p1 in grid:
        val = exact_rate(ch, PowerAllocation(np.array([p1, 1.0 - p1])))
        if val > best_val:
            best_p1, best_val = p1, val
    assert abs(alloc.powers[0] - best_p1) <= 5e-3
    assert abs(alloc.powers[1] - (1.0 - best_p1)) <= 5e-3


def test_optimal_allocation_dominates_simpler_strategies():
    rng = np.random.default_rng(3)
    for _ in range(20):
        subs = [
            SubchannelSpec(
                theta=10 ** rng.uniform(-1, 1),
                m=float(rng.choice([0.5, 1.0, 2.0])),
                L=int(rng.integers(1, 5)),
            )
            for _ in range(2)
        ]
        ch = ParallelChannel(subs, n0=1.0, p_total=10 ** rng.uniform(-0.5, 1.0))
        opt = optimal_allocation(ch)
        swf = waterfill(ch.mean_gains, ch.n0, ch.p_total)
        eq = equal_power(ch.n, ch.p_total)
        opt_rate = exact_rate(ch, opt)
        assert opt_rate >= exact_rate(ch, swf) - 1e-9
        assert opt_rate >= exact_rate(ch, eq) - 1e-9


def test_optimal_allocation_flattens_with_diversity():
    def channel_for(L):
        subs = [SubchannelSpec(theta=t, m=1.0, L=L) for t in (0.4, 0.8, 1.2, 1.6)]
        return ParallelChannel(subs, n0=1.0, p_total=4.0)

    deviations = []
    for L in (2, 64):
        powers = optimal_allocation(channel_for(L)).powers
        deviations.append(np.max(np.abs(powers - 1.0)))
    assert deviations[1] < deviations[0]


def test_optimal_allocation_objective_beats_waterfilling_jensen_gap():
    # the optimum can only lose to waterfilling on the Jensen surrogate,
    # never on the exact objective
    ch = ParallelChannel(
        [SubchannelSpec(theta=2.0, m=0.5, L=1), SubchannelSpec(theta=0.1, m=2.0, L=3)],
        n0=1.0,
        p_total=2.0,
    )
    opt = optimal_allocation(ch)
    swf = waterfill(ch.mean_gains, ch.n0, ch.p_total)
    assert exact_rate(ch, opt) >= exact_rate(ch, swf) - 1e-9
    assert jensen_upper(ch, swf) >= jensen_upper(ch, opt) - 1e-12
