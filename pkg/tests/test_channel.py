import math

import numpy as np
import pytest
from scipy import stats

from simocap.channel import (
    FitError,
    GainMatrix,
    ParallelChannel,
    SubchannelSpec,
    build_decay_profile,
    fit_gamma_moments,
    mean_gain,
    sample_gains,
)


def test_mean_gain_is_theta_m_l():
    assert mean_gain(SubchannelSpec(theta=1.0, m=1.0, L=1)) == 1.0
    assert mean_gain(SubchannelSpec(theta=0.5, m=2.0, L=4)) == 4.0
    assert mean_gain(SubchannelSpec(theta=2.0, m=0.5, L=3)) == 3.0


def test_subchannel_spec_validation():
    with pytest.raises(ValueError):
        SubchannelSpec(theta=0.0, m=1.0, L=1)
    with pytest.raises(ValueError):
        SubchannelSpec(theta=1.0, m=0.4, L=1)
    with pytest.raises(ValueError):
        SubchannelSpec(theta=1.0, m=1.0, L=0)
    with pytest.raises(ValueError):
        SubchannelSpec(theta=1.0, m=1.0, L=1.5)


def test_parallel_channel_validation():
    sub = SubchannelSpec(theta=1.0, m=1.0, L=2)
    with pytest.raises(ValueError):
        ParallelChannel(subchannels=[], n0=1.0, p_total=1.0)
    with pytest.raises(ValueError):
        ParallelChannel(subchannels=[sub], n0=0.0, p_total=1.0)
    with pytest.raises(ValueError):
        ParallelChannel(subchannels=[sub], n0=1.0, p_total=-1.0)
    ch = ParallelChannel(subchannels=[sub, sub], n0=1.0, p_total=3.0)
    assert ch.n == 2
    assert np.allclose(ch.mean_gains, [2.0, 2.0])
    assert ch.with_power(5.0).p_total == 5.0


def test_flat_profile_has_unit_gains():
    ch = build_decay_profile(8, 5e9, 6e9, 0.0, 1.0, 2, 1.0, 1.0)
    assert np.allclose(ch.mean_gains, 1.0, atol=1e-14)


def test_two_bin_cubic_decay_profile():
    # mean gains proportional to 1/5^3 and 1/6^3, renormalized to unit average
    ch = build_decay_profile(2, 5e9, 6e9, 3.0, 1.0, 1, 1.0, 1.0)
    w = np.array([5.0**-3, 6.0**-3])
    expected = w / w.mean()
    assert np.allclose(ch.mean_gains, expected, rtol=1e-14)
    assert np.allclose(ch.mean_gains, [1.26686, 0.73314], atol=1e-5)


def test_full_band_profile_is_unit_average():
    ch = build_decay_profile(588, 5e9, 6e9, 3.0, 1.0, 4, 1.0, 1.0)
    assert ch.n == 588
    assert abs(ch.mean_gains.mean() - 1.0) < 1e-12
    freqs = np.array([s.freq_hz for s in ch.subchannels])
    assert freqs[0] == 5e9 and freqs[-1] == 6e9
    assert np.all(np.diff(freqs) > 0)
    # theta carries the normalized mean: theta = mu / (m * L)
    for sub, mu in zip(ch.subchannels, ch.mean_gains):
        assert math.isclose(sub.theta, mu / (sub.m * sub.L), rel_tol=1e-14)


def test_single_bin_profile_sits_at_band_center():
    ch = build_decay_profile(1, 5e9, 6e9, 3.0, 1.0, 2, 1.0, 1.0)
    assert ch.subchannels[0].freq_hz == 5.5e9
    assert math.isclose(ch.mean_gains[0], 1.0, rel_tol=1e-14)


def test_decay_profile_rejects_bad_band():
    with pytest.raises(ValueError):
        build_decay_profile(4, 6e9, 5e9, 3.0, 1.0, 1, 1.0, 1.0)
    with pytest.raises(ValueError):
        build_decay_profile(4, 0.0, 6e9, 3.0, 1.0, 1, 1.0, 1.0)
    with pytest.raises(ValueError):
        build_decay_profile(0, 5e9, 6e9, 3.0, 1.0, 1, 1.0, 1.0)
    with pytest.raises(ValueError):
        build_decay_profile(4, 5e9, 6e9, -1.0, 1.0, 1, 1.0, 1.0)


def test_sample_gains_is_deterministic_per_seed():
    ch = build_decay_profile(3, 5e9, 6e9, 3.0, 1.0, 2, 1.0, 1.0)
    a = sample_gains(ch, 64, seed=42)
    b = sample_gains(ch, 64, seed=42)
    c = sample_gains(ch, 64, seed=43)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert a.seed == 42


def test_sample_gains_mean_matches_clt_bound():
    ch = ParallelChannel([SubchannelSpec(theta=1.0, m=1.0, L=4)], 1.0, 1.0)
    draws = sample_gains(ch, 100_000, seed=7).values[:, 0]
    # Var(g) = m*L*theta^2 = 4
    assert abs(draws.mean() - 4.0) <= 4.0 * math.sqrt(4.0 / 100_000)


def test_sample_gains_match_sum_of_exponentials():
    # integer shape: Gamma(3, 1) is the law of a sum of 3 unit exponentials
    ch = ParallelChannel([SubchannelSpec(theta=1.0, m=1.0, L=3)], 1.0, 1.0)
    gamma_draws = sample_gains(ch, 10_000, seed=123).values[:, 0]
    rng = np.random.default_rng(321)
    exp_sums = rng.exponential(1.0, size=(10_000, 3)).sum(axis=1)
    statistic = stats.ks_2samp(gamma_draws, exp_sums).statistic
    critical_1pct = 1.628 * math.sqrt(2.0 / 10_000)
    assert statistic < critical_1pct


def test_sample_gains_rejects_zero_snapshots():
    ch = ParallelChannel([SubchannelSpec(theta=1.0, m=1.0, L=1)], 1.0, 1.0)
    with pytest.raises(ValueError):
        sample_gains(ch, 0, seed=1)


def test_gain_matrix_validation():
    with pytest.raises(ValueError):
        GainMatrix(values=np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        GainMatrix(values=np.array([[1.0, -0.5]]))


def test_fit_gamma_moments_algebra():
    # mean 1, variance 0.5: shape 2, scale 0.5 by construction
    samples = np.array([1.0 - math.sqrt(0.5), 1.0 + math.sqrt(0.5)])
    shape, scale = fit_gamma_moments(samples)
    assert math.isclose(shape, 2.0, rel_tol=1e-12)
    assert math.isclose(scale, 0.5, rel_tol=1e-12)


def test_fit_gamma_moments_degenerate_inputs():
    with pytest.raises(FitError):
        fit_gamma_moments([3.0, 3.0, 3.0])
    with pytest.raises(FitError):
        fit_gamma_moments([1.0])
    with pytest.raises(ValueError):
        fit_gamma_moments([1.0, -2.0])


def test_fit_recovers_sampled_parameters():
    ch = ParallelChannel([SubchannelSpec(theta=0.25, m=1.0, L=4)], 1.0, 1.0)
    draws = sample_gains(ch, 100_000, seed=5).values[:, 0]
    shape, scale = fit_gamma_moments(draws)
    assert abs(shape - 4.0) / 4.0 < 0.05
    assert abs(scale - 0.25) / 0.25 < 0.05


@pytest.mark.parametrize("m", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("L", [1, 4])
@pytest.mark.parametrize("theta", [0.5, 2.0])
def test_sampling_and_fitting_are_consistent(m, L, theta):
    ch = ParallelChannel([SubchannelSpec(theta=theta, m=m, L=L)], 1.0, 1.0)
    draws = sample_gains(ch, 100_000, seed=int(1000 * m + 10 * L + theta)).values[:, 0]
    mu = mean_gain(ch.subchannels[0])
    sigma = math.sqrt(m * L * theta**2 / 100_000)
    assert abs(draws.mean() - mu) <= 4.0 * sigma
    shape, scale = fit_gamma_moments(draws)
    assert abs(shape - m * L) / (m * L) < 0.05
    assert abs(scale - theta) / theta < 0.05
