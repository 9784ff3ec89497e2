"""Parallel channels of gamma-fading SIMO subchannels.

A subchannel bundles L independent Nakagami-m branches with common scale
theta and shape m, so its combined power gain is Gamma(m*L, theta) with
mean theta*m*L.  A parallel channel is an ordered list of such
subchannels sharing one noise level and one total power budget.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "FitError",
    "SubchannelSpec",
    "ParallelChannel",
    "GainMatrix",
    "mean_gain",
    "build_decay_profile",
    "sample_gains",
    "fit_gamma_moments",
]


class FitError(ValueError):
    """A distribution fit is impossible on the given samples."""


@dataclass(frozen=True)
class SubchannelSpec:
    """Fading law of one SIMO subchannel.

    theta: per-branch gamma scale (linear power gain units).
    m: Nakagami shape of each branch, at least 0.5.
    L: number of diversity branches (degrees of freedom).
    freq_hz: optional center frequency for frequency-selective profiles.
    """

    theta: float
    m: float
    L: int
    freq_hz: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "m", float(self.m))
        if int(self.L) != self.L or self.L < 1:
            raise ValueError(f"L must be a positive integer, got {self.L!r}")
        object.__setattr__(self, "L", int(self.L))
        if not (math.isfinite(self.theta) and self.theta > 0.0):
            raise ValueError(f"theta must be positive and finite, got {self.theta!r}")
        if not (math.isfinite(self.m) and self.m >= 0.5):
            raise ValueError(f"m must be >= 0.5, got {self.m!r}")

    @property
    def shape(self) -> float:
        """Shape of the combined gain distribution, m*L."""
        return self.m * self.L


def mean_gain(spec: SubchannelSpec) -> float:
    """Mean combined subchannel gain, theta*m*L."""
    return spec.theta * spec.m * spec.L


@dataclass(frozen=True, eq=False)
class ParallelChannel:
    """Ordered subchannels plus a common noise level and power budget."""

    subchannels: tuple
    n0: float
    p_total: float

    def __post_init__(self):
        object.__setattr__(self, "subchannels", tuple(self.subchannels))
        object.__setattr__(self, "n0", float(self.n0))
        object.__setattr__(self, "p_total", float(self.p_total))
        if len(self.subchannels) < 1:
            raise ValueError("a parallel channel needs at least one subchannel")
        if not all(isinstance(s, SubchannelSpec) for s in self.subchannels):
            raise ValueError("subchannels must be SubchannelSpec instances")
        if not (math.isfinite(self.n0) and self.n0 > 0.0):
            raise ValueError(f"n0 must be positive and finite, got {self.n0!r}")
        if not (math.isfinite(self.p_total) and self.p_total > 0.0):
            raise ValueError(f"p_total must be positive and finite, got {self.p_total!r}")

    @property
    def n(self) -> int:
        return len(self.subchannels)

    @property
    def mean_gains(self) -> np.ndarray:
        return np.array([mean_gain(s) for s in self.subchannels])

    def with_power(self, p_total: float) -> "ParallelChannel":
        """Same channel under a different total power budget."""
        return replace(self, p_total=p_total)


def build_decay_profile(
    n_bins: int,
    f_lo_hz: float,
    f_hi_hz: float,
    decay_exponent: float,
    m: float,
    L: int,
    n0: float,
    p_total: float,
) -> ParallelChannel:
    """Frequency-selective profile with mean gains falling off like f^(-decay_exponent).

    Bin frequencies span [f_lo_hz, f_hi_hz] uniformly (endpoints included;
    a single bin sits at the band center).  Mean gains are renormalized so
    their average over bins is exactly one, and each subchannel's scale is
    theta = mu / (m * L).
    """
    if n_bins < 1 or int(n_bins) != n_bins:
        raise ValueError("n_bins must be a positive integer")
    if not (f_hi_hz > f_lo_hz > 0.0):
        raise ValueError(f"need f_hi_hz > f_lo_hz > 0, got [{f_lo_hz!r}, {f_hi_hz!r}]")
    if not (decay_exponent >= 0.0 and math.isfinite(decay_exponent)):
        raise ValueError("decay_exponent must be nonnegative and finite")
    if n_bins == 1:
        freqs = np.array([0.5 * (f_lo_hz + f_hi_hz)])
    else:
        freqs = np.linspace(f_lo_hz, f_hi_hz, int(n_bins))
    weights = freqs ** (-float(decay_exponent))
    mu = weights / weights.mean()
    subs = tuple(
        SubchannelSpec(theta=mu_n / (m * L), m=m, L=L, freq_hz=f)
        for mu_n, f in zip(mu, freqs)
    )
    return ParallelChannel(subchannels=subs, n0=n0, p_total=p_total)


@dataclass(frozen=True, eq=False)
class GainMatrix:
    """Realized subchannel gains indexed by (snapshot, subchannel).

    ``seed`` records the generator seed that produced the matrix; it is
    None for measured data.
    """

    values: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError("values must be a (snapshots, subchannels) matrix")
        if not np.all(values >= 0.0):
            raise ValueError("gains must be nonnegative")

    @property
    def snapshots(self) -> int:
        return self.values.shape[0]

    @property
    def n_subchannels(self) -> int:
        return self.values.shape[1]


def sample_gains(channel: ParallelChannel, n_snapshots: int, seed: int) -> GainMatrix:
    """Draw i.i.d. gains, one Gamma(m*L, theta) column per subchannel.

    The stream for subchannel n is derived from (seed, n) through a
    SeedSequence spawn key, so the result is bit-identical for identical
    inputs and independent of any evaluation order across subchannels.
    numpy's gamma generator implements the Marsaglia-Tsang squeeze with
    the shape<1 boost transform.
    """
    if n_snapshots < 1 or int(n_snapshots) != n_snapshots:
        raise ValueError("n_snapshots must be a positive integer")
    values = np.empty((int(n_snapshots), channel.n))
    for n, sub in enumerate(channel.subchannels):
        rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(n,)))
        values[:, n] = rng.gamma(shape=sub.shape, scale=sub.theta, size=int(n_snapshots))
    return GainMatrix(values=values, seed=int(seed))


def fit_gamma_moments(samples) -> tuple[float, float]:
    """Method-of-moments gamma fit: shape = mean^2/var, scale = var/mean."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 1:
        arr = arr.ravel()
    if arr.size < 2:
        raise FitError("need at least 2 samples to fit a gamma distribution")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise ValueError("samples must be nonnegative and finite")
    mean = float(arr.mean())
    var = float(arr.var())
    if var <= 0.0:
        raise FitError("sample variance is zero; gamma fit is degenerate")
    return mean * mean / var, var / mean
