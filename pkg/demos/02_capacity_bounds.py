"""Bracketing the ergodic capacity of a frequency-selective channel.

With only statistical channel knowledge at the transmitter, the ergodic
capacity is pinned between a Jensen upper bound (rates at the mean gains,
waterfilled) and two lower bounds: the exact achievable rate of the
chosen allocation, and a cheaper Markov-inequality bound with a free
parameter per subchannel.  The maximum percent error (MPE) of the bound
pair certifies how far the allocation can possibly be from optimal.
"""

from simocap import (
    build_decay_profile,
    equal_power,
    evaluate_bounds,
    markov_lower,
    resolve_strategy,
    snr_db_to_power,
)


def main():
    n_bins = 32
    base = build_decay_profile(
        n_bins, 5e9, 6e9, decay_exponent=3.0, m=1.0, L=4, n0=1.0, p_total=1.0
    )
    print(f"{n_bins} bins over 5-6 GHz, mean gain falling like f^-3, "
          f"spread {base.mean_gains.min():.3f}..{base.mean_gains.max():.3f} (avg 1)")

    print("\n   snr_db  strategy              norm.upper  norm.lower  mpe%")
    for snr_db in (-15.0, -5.0, 5.0, 15.0):
        channel = base.with_power(snr_db_to_power(n_bins, base.n0, snr_db))
        for strategy in ("statistical-waterfill", "equal"):
            alloc = resolve_strategy(channel, strategy)
            report = evaluate_bounds(channel, alloc, snr_db)
            print(f"  {snr_db:7.1f}  {strategy:<20s}  {report.normalized_upper:10.4f}"
                  f"  {report.normalized_lower:10.4f}  {report.mpe_percent:6.2f}")
    print("\nStatistical waterfilling pulls ahead of balanced loading at low SNR,")
    print("where only the strongest subchannels deserve power.")

    # the Markov bound's free parameter: closed-form rule vs maximization
    channel = base.with_power(snr_db_to_power(n_bins, base.n0, 0.0))
    alloc = equal_power(channel.n, channel.p_total)
    print("\nMarkov lower bound at 0 dB under different parameter rules:")
    for alpha in (0.3, 0.6, 0.9):
        print(f"  alpha = {alpha:.1f}: {markov_lower(channel, alloc, alpha=alpha):8.4f} nats")
    print(f"  maximized per subchannel: {markov_lower(channel, alloc):8.4f} nats")


if __name__ == "__main__":
    main()
