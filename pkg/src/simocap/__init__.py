"""Capacity bounds and power loading for parallel channels of SIMO fading subchannels.

The library models a parallel channel whose subchannels each combine L
independent Nakagami-m diversity branches (gamma-distributed power
gains), and provides:

* exact water-level power allocation (statistical or instantaneous) and
  the exact distribution-aware optimum over the power simplex,
* Jensen upper and Markov lower bounds on the ergodic capacity, the
  achievable rate of any allocation, and the maximum-percent-error gap
  certificate between them,
* the single-subchannel lower/upper bound ratio with its large-diversity
  expansion, and convergence studies of the gap versus diversity order,
* ingestion and normalization of measured frequency-response data in a
  flat CSV interchange format, plus a matching synthetic generator.

Rates are in nats unless explicitly converted to bits.
"""

__version__ = "0.1.0"

from .alloc import PowerAllocation, equal_power, optimal_allocation, waterfill
from .channel import (
    FitError,
    GainMatrix,
    ParallelChannel,
    SubchannelSpec,
    build_decay_profile,
    fit_gamma_moments,
    mean_gain,
    sample_gains,
)
from .ingest import (
    NormalizationError,
    ParseError,
    SnapshotSet,
    empirical_means,
    generate_snapshots,
    normalize_unit_mean,
    parse_channel_csv,
    pooled_mean_gain,
    simo_gains,
    write_channel_csv,
)
from .rates import (
    BoundsReport,
    ConvergencePoint,
    ConvergenceStudy,
    MetricUndefinedError,
    RatioParams,
    awgn_reference,
    bound_ratio,
    bound_ratio_expansion,
    convergence_study,
    empirical_rate,
    ergodic_mi,
    evaluate_bounds,
    exact_rate,
    jensen_upper,
    markov_lower,
    mpe,
    pointwise_mi,
    ratio_gamma_term,
    ratio_log_term,
    resolve_strategy,
    snr_db_to_power,
)
from .specfun import (
    DEFAULT_QUAD,
    NumericError,
    QuadratureSpec,
    exp_integral_e1,
    gamma_expectation,
    log_gamma,
    reg_gamma_q,
)

__all__ = [
    "__version__",
    "PowerAllocation",
    "equal_power",
    "optimal_allocation",
    "waterfill",
    "FitError",
    "GainMatrix",
    "ParallelChannel",
    "SubchannelSpec",
    "build_decay_profile",
    "fit_gamma_moments",
    "mean_gain",
    "sample_gains",
    "NormalizationError",
    "ParseError",
    "SnapshotSet",
    "empirical_means",
    "generate_snapshots",
    "normalize_unit_mean",
    "parse_channel_csv",
    "pooled_mean_gain",
    "simo_gains",
    "write_channel_csv",
    "BoundsReport",
    "ConvergencePoint",
    "ConvergenceStudy",
    "MetricUndefinedError",
    "RatioParams",
    "awgn_reference",
    "bound_ratio",
    "bound_ratio_expansion",
    "convergence_study",
    "empirical_rate",
    "ergodic_mi",
    "evaluate_bounds",
    "exact_rate",
    "jensen_upper",
    "markov_lower",
    "mpe",
    "pointwise_mi",
    "ratio_gamma_term",
    "ratio_log_term",
    "resolve_strategy",
    "snr_db_to_power",
    "DEFAULT_QUAD",
    "NumericError",
    "QuadratureSpec",
    "exp_integral_e1",
    "gamma_expectation",
    "log_gamma",
    "reg_gamma_q",
]
