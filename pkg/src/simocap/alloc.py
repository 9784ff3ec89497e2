"""Power allocation strategies over a parallel channel.

``waterfill`` is the exact active-set water-level solver; fed the mean
gains it is statistical waterfilling, fed realized gains it is
instantaneous waterfilling.  ``optimal_allocation`` maximizes the exact
ergodic sum rate over the power simplex when only the gain distributions
are known at the transmitter.
"""

import math
from dataclasses import dataclass

import numpy as np

from .channel import ParallelChannel, SubchannelSpec, mean_gain
from .specfun import DEFAULT_QUAD, NumericError, QuadratureSpec, gamma_expectation

__all__ = [
    "PowerAllocation",
    "waterfill",
    "equal_power",
    "optimal_allocation",
]

_OUTER_ITER_CAP = 200
_INNER_ITER_CAP = 100


@dataclass(frozen=True, eq=False)
class PowerAllocation:
    """Nonnegative per-subchannel powers, optionally with a water level."""

    powers: np.ndarray
    water_level: float | None = None
    strategy_tag: str = "custom"

    def __post_init__(self):
        powers = np.asarray(self.powers, dtype=float)
        object.__setattr__(self, "powers", powers)
        if powers.ndim != 1 or powers.size < 1:
            raise ValueError("powers must be a 1-D vector")
        if not np.all(np.isfinite(powers)) or np.any(powers < 0.0):
            raise ValueError("powers must be nonnegative and finite")

    @property
    def n(self) -> int:
        return self.powers.size

    @property
    def total(self) -> float:
        return float(self.powers.sum())


def waterfill(
    gains, n0: float, p_total: float, strategy_tag: str = "statistical-waterfill"
) -> PowerAllocation:
    """Exact water-level allocation p_n = max(0, nu - n0/g_n), sum p_n = p_total.

    Solved by the active-set method: with thresholds n0/g_n sorted
    ascending, the water level over the active prefix A is
    nu = (p_total + sum_A n0/g_n) / |A|, and the active set is the
    largest prefix keeping every active power strictly positive.  Tied
    thresholds activate all-or-none automatically.

    Fed mean gains this is statistical waterfilling (the default tag);
    pass realized gains and ``strategy_tag="instantaneous-waterfill"``
    for the full-knowledge variant.
    """
    g = np.asarray(gains, dtype=float)
    if g.ndim != 1 or g.size < 1:
        raise ValueError("gains must be a 1-D vector")
    if not np.all(np.isfinite(g)) or np.any(g <= 0.0):
        raise ValueError("all gains must be positive and finite")
    if not (n0 > 0.0 and p_total > 0.0):
        raise ValueError("n0 and p_total must be positive")

    thresholds = n0 / g
    order = np.argsort(thresholds, kind="stable")
    sorted_thr = thresholds[order]
    k = np.arange(1, g.size + 1, dtype=float)
    nu_candidates = (p_total + np.cumsum(sorted_thr)) / k
    active = nu_candidates > sorted_thr
    k_star = int(np.flatnonzero(active).max()) + 1
    nu = float(nu_candidates[k_star - 1])

    powers = np.zeros(g.size)
    powers[order[:k_star]] = nu - sorted_thr[:k_star]
    return PowerAllocation(powers=powers, water_level=nu, strategy_tag=strategy_tag)


def equal_power(n: int, p_total: float) -> PowerAllocation:
    """Balanced allocation: each of n subchannels gets p_total / n."""
    if n < 1 or int(n) != n:
        raise ValueError("n must be a positive integer")
    if not (p_total > 0.0):
        raise ValueError("p_total must be positive")
    return PowerAllocation(powers=np.full(int(n), p_total / n), strategy_tag="equal")


def _marginal_utility(sub: SubchannelSpec, p: float, n0: float, quad: QuadratureSpec) -> float:
    # d/dp E[log(1 + p*g/n0)] = E[g / (n0 + p*g)]; at p = 0 this is mu/n0.
    if p == 0.0:
        return mean_gain(sub) / n0
    return gamma_expectation(lambda g: g / (n0 + p * g), sub.shape, sub.theta, quad)


def _marginal_curvature(sub: SubchannelSpec, p: float, n0: float, quad: QuadratureSpec) -> float:
    return -gamma_expectation(lambda g: (g / (n0 + p * g)) ** 2, sub.shape, sub.theta, quad)


def _solve_power_for_multiplier(
    sub: SubchannelSpec, lam: float, n0: float, p_hint: float, quad: QuadratureSpec
) -> float:
    """Power at which the subchannel's marginal utility equals lam (0 if never)."""
    if mean_gain(sub) / n0 <= lam:
        return 0.0
    hi = max(p_hint, 1.0)
    for _ in range(_INNER_ITER_CAP):
        if _marginal_utility(sub, hi, n0, quad) <= lam:
            break
        hi *= 2.0
    else:
        raise NumericError("could not bracket the marginal-utility root")
    lo = 0.0
    p = 0.5 * hi
    for _ in range(_INNER_ITER_CAP):
        val = _marginal_utility(sub, p, n0, quad)
        if abs(val - lam) <= 1e-13 * lam:
            return p
        if val > lam:
            lo = p
        else:
            hi = p
        if hi - lo <= 1e-13 * max(1.0, hi):
            break
        # Newton step on the strictly decreasing marginal, bisection fallback
        step = (val - lam) / _marginal_curvature(sub, p, n0, quad)
        candidate = p - step
        p = candidate if lo < candidate < hi else 0.5 * (lo + hi)
    return 0.5 * (lo + hi)


def optimal_allocation(
    channel: ParallelChannel,
    tol: float = 1e-8,
    quad: QuadratureSpec | None = None,
) -> PowerAllocation:
    """Exact maximizer of the ergodic sum rate over the power simplex.

    The objective sum_n E[log(1 + p_n*g_n/n0)] is strictly concave, so the
    optimum is characterized by a shared multiplier lam on the marginal
    utilities E[g/(n0 + p*g)]: subchannels with mu_n/n0 <= lam are shut
    off, the rest solve their marginal equation.  lam is found by outer
    bisection; the search stops once the allocated total is within
    tol * p_total of the budget, and powers are then rescaled to sum to
    the budget exactly.
    """
    if not (tol > 0.0):
        raise ValueError("tol must be positive")
    quad = DEFAULT_QUAD if quad is None else quad
    n0 = channel.n0
    p_total = channel.p_total
    subs = channel.subchannels

    def powers_at(lam: float) -> np.ndarray:
        return np.array(
            [_solve_power_for_multiplier(sub, lam, n0, p_total, quad) for sub in subs]
        )

    lam_hi = float(channel.mean_gains.max()) / n0  # total allocated power is 0 here
    lam_lo = lam_hi
    for _ in range(_OUTER_ITER_CAP):
        lam_lo *= 0.5
        if powers_at(lam_lo).sum() >= p_total:
            break
    else:
        raise NumericError("could not bracket the water-level multiplier")

    powers = None
    residual = math.inf
    for _ in range(_OUTER_ITER_CAP):
        lam = 0.5 * (lam_lo + lam_hi)
        powers = powers_at(lam)
        total = powers.sum()
        residual = total - p_total
        if abs(residual) <= tol * p_total:
            break
        if total > p_total:
            lam_lo = lam
        else:
            lam_hi = lam
    else:
        raise NumericError(
            f"multiplier bisection did not converge; power residual {residual:.3e}"
        )

    powers = powers * (p_total / powers.sum())
    return PowerAllocation(powers=powers, strategy_tag="optimal")
