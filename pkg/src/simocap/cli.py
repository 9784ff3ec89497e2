"""Batch experiment runner: subcommands producing plot-ready CSV/JSON.

Subcommands: ``waterfill`` (one-shot allocation table), ``bounds-sweep``
(bounds vs SNR), ``mpe-study`` (bound gap vs diversity order),
``gen-synthetic`` (channel CSV generator), and ``ingest`` (measured-data
statistics).  Configuration is a JSON document whose fields individual
command-line flags override; every effective value is echoed into a
``<output>.meta.json`` sidecar so any output file can be reproduced.

Exit codes: 0 success, 2 input or validation error, 3 output error,
4 numeric non-convergence.  Outputs are byte-identical for identical
(config, seed), independent of the worker count selected through the
``SIMOCAP_WORKERS`` environment variable (absent means automatic).
"""

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .alloc import waterfill
from .channel import FitError, build_decay_profile
from .ingest import (
    NormalizationError,
    ParseError,
    empirical_means,
    generate_snapshots,
    normalize_unit_mean,
    parse_channel_csv,
    pooled_mean_gain,
    simo_gains,
    write_channel_csv,
)
from .channel import fit_gamma_moments
from .rates import (
    LN2,
    evaluate_bounds,
    resolve_strategy,
    snr_db_to_power,
)
from .specfun import NumericError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_OUTPUT = 3
EXIT_NUMERIC = 4

WORKERS_ENV = "SIMOCAP_WORKERS"
NOISE_VAR = 1.0

_SNR_DEFINITION = (
    "snr_db = 10*log10(p_total / (n_bins * n0)): average per-subchannel "
    "transmit SNR under the unit-average mean-gain normalization"
)
_AWGN_NORMALIZER = (
    "capacity of the deterministic parallel channel with gains fixed at the "
    "mean gains, under waterfilled power (equals the Jensen upper bound at "
    "the statistical-waterfilling allocation)"
)
_KNOWN_STRATEGIES = ("statistical-waterfill", "equal", "optimal")

BOUNDS_COLUMNS = (
    "snr_db",
    "strategy",
    "c_upper",
    "c_lower_exact",
    "c_lower_markov",
    "c_awgn_ref",
    "normalized_upper",
    "normalized_lower",
    "mpe_percent",
)
MPE_COLUMNS = ("L", "snr_db", "c_upper", "c_lower_exact", "mpe_percent")


@dataclass
class ExperimentConfig:
    f_lo_hz: float = 5e9
    f_hi_hz: float = 6e9
    n_bins: int = 64
    decay_exponent: float = 3.0
    m: float = 1.0
    l_values: list = field(default_factory=lambda: [4])
    snr_db_values: list = field(default_factory=lambda: [float(s) for s in range(-20, 21)])
    n_snapshots: int = 441
    seed: int = 0
    strategies: list = field(default_factory=lambda: ["statistical-waterfill", "equal"])
    a_rule: str = "max"
    rate_units: str = "nats"
    output_path: str = ""

    def validate(self):
        if not (self.f_hi_hz > self.f_lo_hz > 0.0):
            raise ValueError("need f_hi_hz > f_lo_hz > 0")
        if self.n_bins < 1:
            raise ValueError("n_bins must be a positive integer")
        if self.decay_exponent < 0.0:
            raise ValueError("decay_exponent must be nonnegative")
        if self.m < 0.5:
            raise ValueError("m must be >= 0.5")
        if not self.l_values or any(int(v) != v or v < 1 for v in self.l_values):
            raise ValueError("l_values must be a non-empty list of positive integers")
        if not self.snr_db_values:
            raise ValueError("snr_db_values must be non-empty")
        if self.n_snapshots < 1:
            raise ValueError("n_snapshots must be a positive integer")
        if not self.strategies or any(s not in _KNOWN_STRATEGIES for s in self.strategies):
            raise ValueError(f"strategies must be a non-empty subset of {_KNOWN_STRATEGIES}")
        _parse_a_rule(self.a_rule)
        if self.rate_units not in ("nats", "bits"):
            raise ValueError("rate_units must be 'nats' or 'bits'")


def _parse_a_rule(a_rule: str) -> float | None:
    """'max' selects per-subchannel maximization; 'alpha=X' the closed-form rule."""
    if a_rule == "max":
        return None
    if a_rule.startswith("alpha="):
        alpha = float(a_rule[len("alpha="):])
        if not (0.0 < alpha < 1.0):
            raise ValueError("a_rule alpha must lie strictly between 0 and 1")
        return alpha
    raise ValueError(f"a_rule must be 'max' or 'alpha=<value>', got {a_rule!r}")


def _parse_float_list(text: str) -> list:
    return [float(part) for part in text.split(",") if part != ""]


def _parse_int_list(text: str) -> list:
    return [int(part) for part in text.split(",") if part != ""]


_CONFIG_PARSERS = {
    "f_lo_hz": float,
    "f_hi_hz": float,
    "n_bins": int,
    "decay_exponent": float,
    "m": float,
    "l_values": _parse_int_list,
    "snr_db_values": _parse_float_list,
    "n_snapshots": int,
    "seed": int,
    "strategies": lambda text: [s for s in text.split(",") if s],
    "a_rule": str,
    "rate_units": str,
    "output_path": str,
}


def _load_config(args: argparse.Namespace, overrides: dict | None = None) -> ExperimentConfig:
    cfg = ExperimentConfig(**(overrides or {}))
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                document = json.load(fh)
        except OSError as exc:
            raise ValueError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValueError(f"invalid JSON in {args.config}: {exc}") from exc
        if not isinstance(document, dict):
            raise ValueError("config document must be a JSON object")
        for key, value in document.items():
            if key not in _CONFIG_PARSERS:
                raise ValueError(f"unknown config field {key!r}")
            setattr(cfg, key, value)
    for key, parse in _CONFIG_PARSERS.items():
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            setattr(cfg, key, parse(flag_value) if isinstance(flag_value, str) else flag_value)
    cfg.validate()
    return cfg


def _n_workers(n_tasks: int) -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        workers = min(os.cpu_count() or 1, 8)
    else:
        try:
            workers = int(raw)
        except ValueError:
            raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
        if workers < 1:
            raise ValueError(f"{WORKERS_ENV} must be >= 1, got {workers}")
    return max(1, min(workers, n_tasks))


def _map_tasks(fn, tasks: list) -> list:
    workers = _n_workers(len(tasks))
    if workers == 1:
        return [fn(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _profile_channel(cfg: dict, L: int, snr_db: float):
    ch = build_decay_profile(
        n_bins=cfg["n_bins"],
        f_lo_hz=cfg["f_lo_hz"],
        f_hi_hz=cfg["f_hi_hz"],
        decay_exponent=cfg["decay_exponent"],
        m=cfg["m"],
        L=L,
        n0=NOISE_VAR,
        p_total=1.0,
    )
    return ch.with_power(snr_db_to_power(ch.n, ch.n0, snr_db))


def _bounds_task(task):
    cfg, snr_db, strategy = task
    ch = _profile_channel(cfg, int(cfg["l_values"][0]), snr_db)
    alloc = resolve_strategy(ch, strategy)
    report = evaluate_bounds(ch, alloc, snr_db, alpha=_parse_a_rule(cfg["a_rule"]))
    if cfg["rate_units"] == "bits":
        report = report.in_bits()
    return (
        snr_db,
        strategy,
        report.c_upper,
        report.c_lower_exact,
        report.c_lower_markov,
        report.c_awgn_ref,
        report.normalized_upper,
        report.normalized_lower,
        report.mpe_percent,
    )


def _mpe_task(task):
    cfg, L, snr_db = task
    ch = _profile_channel(cfg, int(L), snr_db)
    alloc = resolve_strategy(ch, "statistical-waterfill")
    report = evaluate_bounds(ch, alloc, snr_db, alpha=_parse_a_rule(cfg["a_rule"]))
    if cfg["rate_units"] == "bits":
        report = report.in_bits()
    return (int(L), snr_db, report.c_upper, report.c_lower_exact, report.mpe_percent)


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _write_csv(path: str, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_format_cell(v) for v in row) for row in rows)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_sidecar(path: str, command: str, cfg: ExperimentConfig, extra: dict | None = None):
    meta = {
        "command": command,
        "config": asdict(cfg),
        "noise_variance": NOISE_VAR,
        "rate_units": cfg.rate_units,
        "snr_definition": _SNR_DEFINITION,
        "awgn_normalizer": _AWGN_NORMALIZER,
        "upper_bound": "Jensen bound at the statistical-waterfilling allocation",
        "version": __version__,
    }
    if extra:
        meta.update(extra)
    with open(path + ".meta.json", "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def cmd_waterfill(args) -> int:
    try:
        means = _parse_float_list(args.means)
    except ValueError:
        print(f"error: could not parse means {args.means!r}", file=sys.stderr)
        return EXIT_INPUT
    if not means:
        print("error: no means given", file=sys.stderr)
        return EXIT_INPUT
    alloc = waterfill(means, args.n0, args.p_total)
    print("subchannel,gain,power")
    for i, (g, p) in enumerate(zip(means, alloc.powers)):
        print(f"{i},{float(g)!r},{float(p)!r}")
    active = int(np.count_nonzero(alloc.powers > 0.0))
    print(f"water_level = {float(alloc.water_level)!r}")
    print(f"active_subchannels = {active} / {alloc.n}")
    return EXIT_OK


def cmd_bounds_sweep(args) -> int:
    cfg = _load_config(args)
    if not cfg.output_path:
        raise ValueError("an output path is required (--output)")
    cfg_dict = asdict(cfg)
    tasks = [
        (cfg_dict, float(snr), strategy)
        for snr in cfg.snr_db_values
        for strategy in cfg.strategies
    ]
    rows = _map_tasks(_bounds_task, tasks)
    rows.sort(key=lambda row: (row[0], row[1]))
    _write_csv(cfg.output_path, BOUNDS_COLUMNS, rows)
    _write_sidecar(cfg.output_path, "bounds-sweep", cfg)
    return EXIT_OK


def cmd_mpe_study(args) -> int:
    cfg = _load_config(
        args,
        overrides={"snr_db_values": [-10.0, 5.0], "l_values": [1, 2, 4, 8, 16]},
    )
    if not cfg.output_path:
        raise ValueError("an output path is required (--output)")
    if len(cfg.l_values) < 2:
        raise ValueError("mpe-study needs at least 2 diversity orders in l_values")
    cfg_dict = asdict(cfg)
    tasks = [(cfg_dict, int(L), float(snr)) for L in cfg.l_values for snr in cfg.snr_db_values]
    rows = _map_tasks(_mpe_task, tasks)
    rows.sort(key=lambda row: (row[0], row[1]))

    slopes = {}
    for snr in cfg.snr_db_values:
        pts = [(L, mpe_pct) for (L, s, _, _, mpe_pct) in rows if s == float(snr)]
        slope = np.polyfit(np.log([p[0] for p in pts]), np.log([p[1] for p in pts]), 1)[0]
        slopes[repr(float(snr))] = float(slope)

    _write_csv(cfg.output_path, MPE_COLUMNS, rows)
    _write_sidecar(cfg.output_path, "mpe-study", cfg, extra={"mpe_slope_by_snr_db": slopes})
    return EXIT_OK


def cmd_gen_synthetic(args) -> int:
    cfg = _load_config(args)
    if not cfg.output_path:
        raise ValueError("an output path is required (--output)")
    ch = _profile_channel(asdict(cfg), int(cfg.l_values[0]), 0.0)
    branches = args.branches if args.branches is not None else None
    snapshots = generate_snapshots(ch, cfg.n_snapshots, cfg.seed, n_branches=branches)
    write_channel_csv(snapshots, cfg.output_path)
    _write_sidecar(cfg.output_path, "gen-synthetic", cfg, extra={"branches": snapshots.branches})
    return EXIT_OK


def cmd_ingest(args) -> int:
    try:
        raw = parse_channel_csv(args.input, f_min_hz=args.f_min_hz, f_max_hz=args.f_max_hz)
    except OSError as exc:
        print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    pooled = pooled_mean_gain(raw)
    normalized = normalize_unit_mean(raw)
    branch_ids = (
        _parse_int_list(args.branches) if args.branches else list(range(normalized.branches))
    )
    gains = simo_gains(normalized, branch_ids)
    means = empirical_means(gains)

    bins = []
    for j in range(normalized.n_bins):
        try:
            fit_shape, fit_scale = fit_gamma_moments(gains.values[:, j])
        except FitError:
            fit_shape = fit_scale = None
        bins.append(
            {
                "bin": j,
                "freq_hz": float(normalized.freqs_hz[j]),
                "mean_gain": float(means[j]),
                "fit_shape": fit_shape,
                "fit_scale": fit_scale,
            }
        )
    stats = {
        "snapshots": raw.snapshots,
        "branches_in_file": raw.branches,
        "branches_used": branch_ids,
        "n_bins": normalized.n_bins,
        "pooled_mean_gain_before_normalization": pooled,
        "normalization_scale_on_power": 1.0 / pooled,
        "normalization": (
            "single scalar applied to all coefficients so the pooled mean of "
            "|h|^2 over snapshots, branches and bins is one; normalization "
            "precedes any branch subsetting"
        ),
        "bins": bins,
    }
    text = json.dumps(stats, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _add_config_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file; flags override its fields")
    sub.add_argument("--f-lo-hz", dest="f_lo_hz", type=float)
    sub.add_argument("--f-hi-hz", dest="f_hi_hz", type=float)
    sub.add_argument("--n-bins", dest="n_bins", type=int)
    sub.add_argument("--decay-exponent", dest="decay_exponent", type=float)
    sub.add_argument("--m", dest="m", type=float)
    sub.add_argument("--l-values", dest="l_values", help="comma-separated diversity orders")
    sub.add_argument("--snr-db", dest="snr_db_values", help="comma-separated SNR values in dB")
    sub.add_argument("--n-snapshots", dest="n_snapshots", type=int)
    sub.add_argument("--seed", dest="seed", type=int)
    sub.add_argument("--strategies", dest="strategies", help="comma-separated strategy tags")
    sub.add_argument("--a-rule", dest="a_rule", help="'max' or 'alpha=<value>'")
    sub.add_argument("--rate-units", dest="rate_units", choices=("nats", "bits"))
    sub.add_argument("--output", dest="output_path", help="output file path")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simocap",
        description="Capacity bounds and power loading for parallel SIMO fading channels.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subparsers = parser.add_subparsers(dest="command", required=True)

    p_wf = subparsers.add_parser("waterfill", help="print a water-level allocation table")
    p_wf.add_argument("--means", required=True, help="comma-separated subchannel gains")
    p_wf.add_argument("--n0", type=float, default=NOISE_VAR, help="noise variance")
    p_wf.add_argument("--p-total", dest="p_total", type=float, default=1.0, help="power budget")
    p_wf.set_defaults(handler=cmd_waterfill)

    p_bs = subparsers.add_parser("bounds-sweep", help="capacity bounds versus SNR (CSV)")
    _add_config_flags(p_bs)
    p_bs.set_defaults(handler=cmd_bounds_sweep)

    p_mpe = subparsers.add_parser("mpe-study", help="bound gap versus diversity order (CSV)")
    _add_config_flags(p_mpe)
    p_mpe.set_defaults(handler=cmd_mpe_study)

    p_gen = subparsers.add_parser("gen-synthetic", help="generate a synthetic channel CSV")
    _add_config_flags(p_gen)
    p_gen.add_argument("--branches", type=int, help="branch count (default: the profile's L)")
    p_gen.set_defaults(handler=cmd_gen_synthetic)

    p_in = subparsers.add_parser("ingest", help="statistics of a measured channel CSV (JSON)")
    p_in.add_argument("--input", required=True, help="channel CSV path")
    p_in.add_argument("--f-min-hz", dest="f_min_hz", type=float, help="inclusive band lower edge")
    p_in.add_argument("--f-max-hz", dest="f_max_hz", type=float, help="inclusive band upper edge")
    p_in.add_argument("--branches", help="comma-separated branch ids (default: all)")
    p_in.add_argument("--output", help="statistics JSON path (default: stdout)")
    p_in.set_defaults(handler=cmd_ingest)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ParseError, NormalizationError, FitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT


def run() -> None:
    sys.exit(main())
