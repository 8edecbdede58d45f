"""Command-line entry point: ``leopnt <subcommand> ...``.

Every subcommand writes CSV (or an IQ file for ``synth``) and is
deterministic for fixed flags and seed.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import bounds, detector, freq_estimator, iq_io, orbit_doppler, signal_model
from .signal_model import DOWNLINK, UPLINK

PROFILES = {"uplink": UPLINK, "downlink": DOWNLINK}


class UsageError(Exception):
    pass


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _unit_interval(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"threshold must lie in (0, 1), got {value}")
    return value


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {value}")
    return value


def _add_representative(p):
    p.add_argument("--profile", choices=sorted(PROFILES), default="uplink")
    p.add_argument("--rep-seed", type=int, default=1,
                   help="seed of the pseudo-random representative (default 1)")
    p.add_argument("--representative", help="IQ file holding a rendered synchronization sequence")


def _add_scenario(p):
    p.add_argument("--orbit-height", type=_positive, default=550e3, help="m")
    p.add_argument("--orbit-height-km", type=_positive, help="overrides --orbit-height")
    p.add_argument("--carrier-freq", type=_positive, default=11.7e9, help="Hz")
    p.add_argument("--earth-radius", type=_positive, default=6_371_000.0, help="m")


def _add_link(p):
    p.add_argument("--flux-db", type=float, default=-122.0, help="dB(W/m²/MHz)")
    p.add_argument("--noise-temperature", type=_positive, default=290.0, help="K")


def _scenario(args) -> orbit_doppler.OverflightScenario:
    height = args.orbit_height_km * 1e3 if args.orbit_height_km else args.orbit_height
    return orbit_doppler.OverflightScenario(height, args.carrier_freq, args.earth_radius)


def _representative(args, signal=None) -> signal_model.SyncSequence:
    profile = PROFILES[args.profile]
    if not args.representative:
        return profile.sync_sequence(args.rep_seed)
    rendered = iq_io.read_iq(args.representative)
    eps = profile.sync_sequence(0)
    if len(rendered) != eps.total_len:
        raise UsageError(f"representative holds {len(rendered)} samples, profile expects {eps.total_len}")
    start = eps.offset(1)
    return signal_model.build_sync_sequence(
        rendered.samples[start:start + eps.subseq_len], eps.prefix_fraction,
        sample_rate=rendered.sample_rate, name=args.representative)


def _out(path):
    return sys.stdout if path in (None, "-") else path


def cmd_synth(args):
    profile = PROFILES[args.profile]
    eps = profile.sync_sequence(args.rep_seed)
    starts = signal_model.bri_starts(args.n_bursts, args.bri, eps.sample_rate, args.first)
    burst_len = eps.total_len + args.data_len
    total = starts[-1] + burst_len + args.tail if starts else args.tail
    if args.noise_variance is not None:
        nv = args.noise_variance
    elif args.snr_db is not None:
        nv = float(10 ** (-args.snr_db / 10))
    else:
        nv = 0.0
    offsets = args.freq_offset
    if len(offsets) not in (1, args.n_bursts):
        raise UsageError("--freq-offset needs one value or one per burst")
    sig = signal_model.synthesize_train(eps, starts, total, nv, args.seed, args.data_len,
                                        offsets if len(offsets) > 1 else offsets[0])
    iq_io.write_iq(sig, args.out, args.format,
                   description=f"{args.n_bursts} {args.profile} bursts, seed {args.seed}")
    if args.rep_out:
        iq_io.write_iq(eps.to_signal(), args.rep_out, "cf32le", description=eps.name)
    if args.truth_out:
        rows = [(s, float(f)) for s, f in zip(starts, np.broadcast_to(offsets, (len(starts),)))]
        iq_io.write_csv(iq_io.Table(("sample_index", "freq_offset_hz"), rows), _out(args.truth_out))


def _detect(args, sig, eps):
    stat = detector.detection_statistic(sig, eps)
    events = detector.detect_bursts(stat, args.threshold, args.window)
    if not args.no_refine:
        events = freq_estimator.refine_events(sig, eps, events)
    return events


def cmd_detect(args):
    sig = iq_io.read_iq(args.iq)
    eps = _representative(args)
    events = _detect(args, sig, eps)
    rows = [(e.sample_index, e.sample_index / sig.sample_rate, e.statistic, int(e.low_confidence))
            for e in events]
    iq_io.write_csv(iq_io.Table(("sample_index", "time_s", "statistic", "low_confidence"), rows),
                    _out(args.out))


def _grid(args, eps):
    if args.f_step is None and args.f_min is None and args.f_max is None:
        return freq_estimator.FrequencyGrid.default(eps)
    default = freq_estimator.FrequencyGrid.default(eps)
    return freq_estimator.FrequencyGrid(
        default.f_min if args.f_min is None else args.f_min,
        default.f_max if args.f_max is None else args.f_max,
        default.step if args.f_step is None else args.f_step,
    )


def cmd_estimate(args):
    sig = iq_io.read_iq(args.iq)
    eps = _representative(args)
    if args.events:
        table = iq_io.read_csv(args.events)
        lags = table.column("sample_index").astype(int) if len(table.rows) else []
        events = [freq_estimator.event_at(sig, eps, int(lag)) for lag in lags]
    else:
        events = _detect(args, sig, eps)
    estimates, _ = freq_estimator.estimate_all(sig, eps, events, _grid(args, eps))
    rows = [(e.sample_index, e.coarse, e.fine, e.ambiguity_index) for e in estimates]
    iq_io.write_csv(iq_io.Table(("l_j", "coarse_hz", "fine_hz", "g_j"), rows), _out(args.out))


def cmd_doppler(args):
    scn = _scenario(args)
    xs = args.cross_track if args.cross_track_km is None else [1e3 * v for v in args.cross_track_km]
    n = int(round((args.t_stop - args.t_start) / args.t_step)) + 1
    times = args.t_start + args.t_step * np.arange(n)
    iq_io.write_csv(orbit_doppler.doppler_curve(scn, xs, times), _out(args.out))


def cmd_crb(args):
    scn = _scenario(args)
    lo, hi = (1e3 * v for v in args.distance_km)
    distances = np.linspace(lo, hi, args.n_distances)
    amap = bounds.accuracy_map(scn, distances, args.rx_gain_db, [60 * v for v in args.tracking_span_min],
                               args.flux_db, args.noise_temperature, stride=args.stride)
    iq_io.write_csv(amap, _out(args.out))


def cmd_snr(args):
    lb = bounds.LinkBudget.from_db(args.flux_db, args.carrier_freq, args.rx_gain_db, args.noise_temperature)
    snr = bounds.snr_at_receiver(lb)
    sigma = np.sqrt(bounds.mcrb_frequency(args.symbol_period, args.n_symbols, snr))
    print(f"snr_db={bounds.linear_to_db(snr):.6f} snr_linear={snr:.9g} sigma_f_hz={sigma:.9g}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="leopnt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic burst train as an IQ file")
    _add_representative(p)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=sorted(iq_io.FORMATS), default="cf32le")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-bursts", type=int, default=5)
    p.add_argument("--bri", type=_positive, default=UPLINK.bri_set[0], help="burst repetition interval, s")
    p.add_argument("--first", type=int, default=10_000, help="start of the first burst, samples")
    p.add_argument("--data-len", type=int, default=20_000)
    p.add_argument("--tail", type=int, default=10_000, help="noise samples after the last burst")
    p.add_argument("--freq-offset", type=_floats, default=[0.0], help="Hz, one value or one per burst")
    noise = p.add_mutually_exclusive_group()
    noise.add_argument("--snr-db", type=float, help="per-sample SNR for unit-power bursts")
    noise.add_argument("--noise-variance", type=float)
    p.add_argument("--rep-out", help="also write the rendered representative here")
    p.add_argument("--truth-out", help="CSV of true burst starts and offsets")
    p.set_defaults(func=cmd_synth)

    for name, func, help_ in (("detect", cmd_detect, "detect bursts, write events CSV"),
                              ("estimate", cmd_estimate, "estimate burst carrier offsets")):
        p = sub.add_parser(name, help=help_)
        _add_representative(p)
        p.add_argument("--iq", required=True)
        p.add_argument("--threshold", type=_unit_interval, default=detector.DEFAULT_THRESHOLD)
        p.add_argument("--window", type=int, help="samples; default twice the sequence length")
        p.add_argument("--no-refine", action="store_true", help="skip subsequence-ambiguity refinement")
        p.add_argument("--out")
        p.set_defaults(func=func)
        if name == "estimate":
            p.add_argument("--events", help="events CSV from 'detect'; detect afresh when omitted")
            p.add_argument("--f-min", type=float)
            p.add_argument("--f-max", type=float)
            p.add_argument("--f-step", type=_positive)

    p = sub.add_parser("doppler", help="received-frequency curves for a zenith pass")
    _add_scenario(p)
    p.add_argument("--cross-track", type=_floats, default=[0.0, 200e3, 400e3, 800e3], help="m")
    p.add_argument("--cross-track-km", type=_floats)
    p.add_argument("--t-start", type=float, default=-300.0)
    p.add_argument("--t-stop", type=float, default=300.0)
    p.add_argument("--t-step", type=_positive, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_doppler)

    p = sub.add_parser("crb", help="positioning-error bound versus cross-track distance")
    _add_scenario(p)
    _add_link(p)
    p.add_argument("--distance-km", type=_floats, default=[10.0, 1000.0], help="first,last")
    p.add_argument("--n-distances", type=int, default=100)
    p.add_argument("--rx-gain-db", type=_floats, default=[8.0])
    p.add_argument("--tracking-span-min", type=_floats, default=[4.0])
    p.add_argument("--stride", type=int, default=1, help="measure every stride-th frame")
    p.add_argument("--out")
    p.set_defaults(func=cmd_crb)

    p = sub.add_parser("snr", help="receiver SNR and frequency-estimate bound")
    _add_link(p)
    p.add_argument("--carrier-freq", type=_positive, default=11.7e9)
    p.add_argument("--rx-gain-db", type=float, default=8.0)
    p.add_argument("--symbol-period", type=_positive, default=DOWNLINK.symbol_period)
    p.add_argument("--n-symbols", type=int, default=DOWNLINK.observed_symbols)
    p.set_defaults(func=cmd_snr)
    return parser


def _validate(args):
    if getattr(args, "command", None) == "crb":
        if len(args.distance_km) != 2 or args.n_distances < 1:
            raise UsageError("--distance-km takes first,last and --n-distances must be positive")
    if getattr(args, "command", None) == "synth" and args.n_bursts < 0:
        raise UsageError("--n-bursts must be non-negative")
    if getattr(args, "window", None) is not None and args.window <= 0:
        raise UsageError("--window must be positive")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _validate(args)
        args.func(args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"leopnt {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
