"""Mutual information, capacity bounds, and convergence diagnostics.

Rates are in nats throughout; conversion to bits happens only at output
formatting (``BoundsReport.in_bits``).  For a feasible allocation {p_n}
over a parallel channel with mean gains {mu_n}:

* upper bound (Jensen):        sum_n log(1 + p_n mu_n / n0), evaluated at
  the statistical-waterfilling allocation it upper-bounds the capacity;
* achievable rate:             sum_n E[log(1 + p_n g_n / n0)];
* lower bound (Markov):        sum_n a_n * Q(m_n L_n, x_n) with
  x_n = (n0/p_n)(e^{a_n} - 1)/theta_n, valid for any a_n > 0.

The single-subchannel ratio of the Markov lower to the Jensen upper bound
drives the large-diversity convergence results; ``bound_ratio`` evaluates
it and ``bound_ratio_expansion`` its leading-order factorization.
"""

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .alloc import PowerAllocation, equal_power, waterfill
from .channel import GainMatrix, ParallelChannel, SubchannelSpec
from .specfun import QuadratureSpec, gamma_expectation, reg_gamma_q

__all__ = [
    "LN2",
    "MetricUndefinedError",
    "BoundsReport",
    "RatioParams",
    "ConvergencePoint",
    "ConvergenceStudy",
    "pointwise_mi",
    "ergodic_mi",
    "jensen_upper",
    "markov_lower",
    "exact_rate",
    "empirical_rate",
    "mpe",
    "bound_ratio",
    "ratio_log_term",
    "ratio_gamma_term",
    "bound_ratio_expansion",
    "awgn_reference",
    "evaluate_bounds",
    "convergence_study",
    "resolve_strategy",
    "snr_db_to_power",
]

LN2 = math.log(2.0)

_A_MAX = 50.0
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class MetricUndefinedError(ValueError):
    """The requested metric is undefined for the given inputs."""


def pointwise_mi(gain: float, p: float, n0: float) -> float:
    """Mutual information log(1 + p*gain/n0) of one subchannel realization."""
    if gain < 0.0 or p < 0.0 or n0 <= 0.0:
        raise ValueError("need gain >= 0, p >= 0, n0 > 0")
    return math.log1p(p * gain / n0)


def ergodic_mi(
    spec: SubchannelSpec, p: float, n0: float, quad: QuadratureSpec | None = None
) -> float:
    """E[log(1 + p*g/n0)] for g ~ Gamma(m*L, theta)."""
    if p < 0.0 or n0 <= 0.0:
        raise ValueError("need p >= 0 and n0 > 0")
    if p == 0.0:
        return 0.0
    c = p / n0
    return gamma_expectation(lambda g: np.log1p(c * g), spec.shape, spec.theta, quad)


def _alloc_powers(channel: ParallelChannel, alloc: PowerAllocation) -> np.ndarray:
    if alloc.n != channel.n:
        raise ValueError(
            f"allocation has {alloc.n} powers but the channel has {channel.n} subchannels"
        )
    return alloc.powers


def jensen_upper(channel: ParallelChannel, alloc: PowerAllocation) -> float:
    """Concavity bound sum_n log(1 + p_n*mu_n/n0) on the ergodic sum rate."""
    powers = _alloc_powers(channel, alloc)
    return float(np.log1p(powers * channel.mean_gains / channel.n0).sum())


def _markov_term(a: float, shape: float, theta: float, p: float, n0: float) -> float:
    return a * reg_gamma_q(shape, (n0 / p) * math.expm1(a) / theta)


def _max_markov_term(shape: float, theta: float, p: float, n0: float) -> float:
    # Coarse log-grid scan followed by golden-section refinement.
    grid = np.geomspace(1e-6, _A_MAX, 48)
    values = [_markov_term(a, shape, theta, p, n0) for a in grid]
    i = int(np.argmax(values))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc = _markov_term(c, shape, theta, p, n0)
    fd = _markov_term(d, shape, theta, p, n0)
    for _ in range(60):
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = _markov_term(c, shape, theta, p, n0)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = _markov_term(d, shape, theta, p, n0)
    return _markov_term(0.5 * (lo + hi), shape, theta, p, n0)


def markov_lower(
    channel: ParallelChannel,
    alloc: PowerAllocation,
    a_values: Sequence[float] | None = None,
    alpha: float | None = None,
) -> float:
    """Markov-inequality lower bound sum_n a_n * Pr(g_n >= (n0/p_n)(e^{a_n}-1)).

    The free parameters a_n > 0 can be given explicitly (``a_values``),
    derived from the closed-form rule a_n = log(1 + alpha*beta_n*L) with
    beta_n = p_n*theta_n*m_n/n0 (``alpha``), or, by default, chosen per
    subchannel by numerical maximization of the term over a in (0, 50].
    Zero-power subchannels contribute zero.
    """
    if a_values is not None and alpha is not None:
        raise ValueError("give at most one of a_values and alpha")
    powers = _alloc_powers(channel, alloc)
    if a_values is not None and len(a_values) != channel.n:
        raise ValueError("a_values length does not match the channel")
    if alpha is not None and not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie strictly between 0 and 1")

    n0 = channel.n0
    total = 0.0
    for i, (sub, p) in enumerate(zip(channel.subchannels, powers)):
        if p == 0.0:
            continue
        if a_values is not None:
            a = float(a_values[i])
            if a <= 0.0:
                raise ValueError(f"a must be positive where power is positive (index {i})")
            total += _markov_term(a, sub.shape, sub.theta, p, n0)
        elif alpha is not None:
            beta = p * sub.theta * sub.m / n0
            a = math.log1p(alpha * beta * sub.L)
            total += _markov_term(a, sub.shape, sub.theta, p, n0)
        else:
            total += _max_markov_term(sub.shape, sub.theta, p, n0)
    return total


def exact_rate(
    channel: ParallelChannel, alloc: PowerAllocation, quad: QuadratureSpec | None = None
) -> float:
    """Ergodic sum rate sum_n E[log(1 + p_n*g_n/n0)] of the allocation."""
    powers = _alloc_powers(channel, alloc)
    return sum(
        ergodic_mi(sub, float(p), channel.n0, quad)
        for sub, p in zip(channel.subchannels, powers)
    )


def empirical_rate(gains: GainMatrix, alloc: PowerAllocation, n0: float) -> float:
    """Snapshot-averaged sum rate over realized gains."""
    if n0 <= 0.0:
        raise ValueError("n0 must be positive")
    if gains.snapshots < 1:
        raise ValueError("need at least one snapshot")
    if gains.n_subchannels != alloc.n:
        raise ValueError(
            f"gain matrix has {gains.n_subchannels} subchannels but the "
            f"allocation has {alloc.n}"
        )
    per_snapshot = np.log1p(gains.values * (alloc.powers / n0)).sum(axis=1)
    return float(per_snapshot.mean())


def mpe(c_upper: float, c_lower: float) -> float:
    """Maximum percent error 100 * (c_upper - c_lower) / c_lower of a bound pair."""
    if not (math.isfinite(c_upper) and math.isfinite(c_lower)) or c_lower < 0.0:
        raise ValueError("bounds must be finite with c_lower >= 0")
    if c_upper < c_lower:
        raise ValueError(f"c_upper ({c_upper}) must not be below c_lower ({c_lower})")
    if c_lower == 0.0:
        raise MetricUndefinedError("MPE is undefined for a zero lower bound")
    return 100.0 * (c_upper - c_lower) / c_lower


@dataclass(frozen=True)
class RatioParams:
    """Single-subchannel parameters of the lower/upper bound ratio.

    beta is the normalized SNR p*theta*m/n0 of the subchannel; alpha in
    (0, 1) selects the closed-form Markov parameter a = log(1 + alpha*beta*L).
    """

    m: float
    L: int
    beta: float
    alpha: float

    def __post_init__(self):
        if not (self.m >= 0.5 and math.isfinite(self.m)):
            raise ValueError("m must be >= 0.5")
        if int(self.L) != self.L or self.L < 1:
            raise ValueError("L must be a positive integer")
        if not (self.beta > 0.0 and math.isfinite(self.beta)):
            raise ValueError("beta must be positive and finite")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("alpha must lie strictly between 0 and 1")


def bound_ratio(params: RatioParams) -> float:
    """Ratio of the Markov lower to the Jensen upper bound for one subchannel.

    log(1 + alpha*beta*L) / log(1 + beta*L) * Q(m*L, alpha*m*L); strictly
    inside (0, 1) and increasing to 1 as L grows.
    """
    m, L, beta, alpha = params.m, params.L, params.beta, params.alpha
    num = math.log1p(alpha * beta * L)
    den = math.log1p(beta * L)
    return (num / den) * reg_gamma_q(m * L, alpha * m * L)


def ratio_log_term(alpha: float, L: float) -> float:
    """Leading logarithmic factor 1 + log(alpha)/log(L) of the ratio expansion."""
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie strictly between 0 and 1")
    if not (L >= 2.0):
        raise ValueError("the logarithmic term needs L >= 2")
    return 1.0 + math.log(alpha) / math.log(L)


def ratio_gamma_term(m: float, L: float, alpha: float) -> float:
    """Leading gamma-function factor 1 - (alpha*e^(1-alpha))^(mL) / ((1-alpha)*sqrt(2*pi*mL))."""
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie strictly between 0 and 1")
    if not (m >= 0.5 and L >= 1.0):
        raise ValueError("need m >= 0.5 and L >= 1")
    mL = m * L
    # alpha*e^(1-alpha) < 1 on (0,1), so the exponent is always negative.
    geometric = math.exp(mL * (math.log(alpha) + 1.0 - alpha))
    return 1.0 - geometric / ((1.0 - alpha) * math.sqrt(2.0 * math.pi * mL))


def bound_ratio_expansion(m: float, L: float, alpha: float) -> tuple[float, float]:
    """Leading-order factors of the large-L expansion of ``bound_ratio``.

    Returns (log_term, gamma_term) without their vanishing corrections;
    their product approximates the exact ratio for large L.
    """
    return ratio_log_term(alpha, L), ratio_gamma_term(m, L, alpha)


def awgn_reference(channel: ParallelChannel) -> float:
    """Capacity of the deterministic parallel channel with gains fixed at the means.

    Waterfilling on the mean gains is optimal there, so this equals the
    Jensen upper bound evaluated at the statistical-waterfilling
    allocation.  Used to normalize rate sweeps.
    """
    swf = waterfill(channel.mean_gains, channel.n0, channel.p_total)
    return jensen_upper(channel, swf)


@dataclass(frozen=True)
class BoundsReport:
    """Bounds, achievable rate proxy, and normalized rates for one configuration."""

    snr_db: float
    strategy_tag: str
    c_upper: float
    c_lower_exact: float
    c_lower_markov: float
    mpe_percent: float
    c_awgn_ref: float
    normalized_upper: float
    normalized_lower: float

    def in_bits(self) -> "BoundsReport":
        """Same report with every rate field converted from nats to bits."""
        return replace(
            self,
            c_upper=self.c_upper / LN2,
            c_lower_exact=self.c_lower_exact / LN2,
            c_lower_markov=self.c_lower_markov / LN2,
            c_awgn_ref=self.c_awgn_ref / LN2,
        )


def snr_db_to_power(channel_n: int, n0: float, snr_db: float) -> float:
    """Total power giving the requested average per-subchannel transmit SNR.

    SNR is defined as p_total / (N * n0) under the unit-average-gain
    normalization of the channel profiles.
    """
    return channel_n * n0 * 10.0 ** (snr_db / 10.0)


def resolve_strategy(
    channel: ParallelChannel,
    strategy: str | Callable[[ParallelChannel], PowerAllocation],
) -> PowerAllocation:
    """Turn a strategy tag or callable into a concrete allocation."""
    if callable(strategy):
        return strategy(channel)
    if strategy == "statistical-waterfill":
        return waterfill(channel.mean_gains, channel.n0, channel.p_total)
    if strategy == "equal":
        return equal_power(channel.n, channel.p_total)
    if strategy == "optimal":
        from .alloc import optimal_allocation

        return optimal_allocation(channel)
    raise ValueError(f"unknown strategy {strategy!r}")


def evaluate_bounds(
    channel: ParallelChannel,
    alloc: PowerAllocation,
    snr_db: float,
    a_values: Sequence[float] | None = None,
    alpha: float | None = None,
    quad: QuadratureSpec | None = None,
) -> BoundsReport:
    """Full bound report for one allocation on one channel.

    The upper bound is always the Jensen bound at the statistical-
    waterfilling allocation (the bound on capacity itself); the lower
    bounds are evaluated at the given allocation, so the MPE certifies how
    far that allocation can be from optimal.
    """
    swf = waterfill(channel.mean_gains, channel.n0, channel.p_total)
    c_upper = jensen_upper(channel, swf)
    c_lower_exact = exact_rate(channel, alloc, quad)
    c_lower_markov = markov_lower(channel, alloc, a_values=a_values, alpha=alpha)
    c_awgn = awgn_reference(channel)
    return BoundsReport(
        snr_db=snr_db,
        strategy_tag=alloc.strategy_tag,
        c_upper=c_upper,
        c_lower_exact=c_lower_exact,
        c_lower_markov=c_lower_markov,
        mpe_percent=mpe(c_upper, c_lower_exact),
        c_awgn_ref=c_awgn,
        normalized_upper=c_upper / c_awgn,
        normalized_lower=c_lower_exact / c_awgn,
    )


@dataclass(frozen=True)
class ConvergencePoint:
    L: int
    c_upper: float
    c_lower_exact: float
    mpe_percent: float


@dataclass(frozen=True)
class ConvergenceStudy:
    points: tuple
    slope: float


def convergence_study(
    profile: Callable[[int], ParallelChannel],
    strategy: str | Callable[[ParallelChannel], PowerAllocation],
    l_list: Sequence[int],
    snr_db: float,
    quad: QuadratureSpec | None = None,
) -> ConvergenceStudy:
    """Bound gap versus diversity order, with a fitted log-log MPE slope.

    ``profile`` maps a diversity order L to a parallel channel; its power
    budget is overridden to match ``snr_db``.  For each L the upper bound
    is the Jensen bound at statistical waterfilling and the lower bound is
    the exact rate of the requested strategy.  The slope is an unweighted
    least-squares fit of log(MPE) against log(L).
    """
    ls = list(l_list)
    if len(ls) < 3:
        raise ValueError("need at least 3 diversity orders to fit a slope")
    if any(b <= a for a, b in zip(ls, ls[1:])):
        raise ValueError("l_list must be strictly increasing")

    points = []
    for L in ls:
        ch = profile(int(L))
        ch = ch.with_power(snr_db_to_power(ch.n, ch.n0, snr_db))
        swf = waterfill(ch.mean_gains, ch.n0, ch.p_total)
        alloc = resolve_strategy(ch, strategy)
        c_upper = jensen_upper(ch, swf)
        c_lower = exact_rate(ch, alloc, quad)
        points.append(ConvergencePoint(int(L), c_upper, c_lower, mpe(c_upper, c_lower)))

    slope = float(
        np.polyfit(
            np.log([p.L for p in points]), np.log([p.mpe_percent for p in points]), 1
        )[0]
    )
    return ConvergenceStudy(points=tuple(points), slope=slope)
