"""Command line interface.

Subcommands:
    run       execute a campaign config (or bundled preset), write metrics
              and per-figure plot data
    capacity  tabulate the capacity laws against their Monte Carlo oracles
    tables    print the built-in MCS tables with a consistency column
    fit       refit the exponential capacity models from Monte Carlo samples
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace
from importlib import resources

import numpy as np

from . import __version__
from .adaptation import POLARIZATION_MCS_TABLE, SYMBOL_MCS_TABLE
from .capacity import (FitError, QPSK, diagonal_ip_bound, fit_exponential_capacity,
                       mc_polarization_mi_ci, mc_qpsk_mi_ci, phi_p, phi_s)
from .config import ConfigError, parse_campaign, serialize_campaign
from .modes import MimoMode
from .sim import run_campaign
from .units import db_to_lin

OUT_DIR_ENV = "PMODSIM_OUT_DIR"

_RUN_PRESETS = {
    "fig3": "paper_fig3.toml",
    "fig4": "paper_fig4.toml",
    "fig5": "paper_fig5.toml",
    "ci": "ci.toml",
}


def _load_preset(name):
    text = resources.files("pmodsim").joinpath("presets", _RUN_PRESETS[name]).read_text()
    from .config import parse_campaign_text
    return parse_campaign_text(text)


def _campaign_dict(spec):
    chan = spec.channel
    return {
        "snr_db": list(spec.snr_db),
        "frames_per_point": spec.frames_per_point,
        "symbols_per_frame": spec.symbols_per_frame,
        "frame_duration_s": spec.frame_duration_s,
        "master_seed": spec.master_seed,
        "channel": {
            "k_factor": chan.rician_k_copolar,
            "xpd_db": chan.xpd_db,
            "doppler_hz": chan.doppler_hz,
            "carrier_hz": chan.carrier_hz,
            "speed_kmh": chan.speed_kmh,
            "seed": chan.seed,
        },
        "mu": spec.mu,
        "p0": spec.p0,
        "delay_frames": spec.delay_frames,
        "mode_sets": [[m.value for m in ms] for ms in spec.mode_sets],
        "margin_trace_decimation": spec.margin_trace_decimation,
    }


def _stamp_lines(spec):
    """Reproducibility header embedded in every output file."""
    return [
        "# pmodsim %s" % __version__,
        "# seed = %d" % spec.master_seed,
        "# config = %s" % json.dumps(_campaign_dict(spec), sort_keys=True),
    ]


def _write_csv(path, spec, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in _stamp_lines(spec):
            fh.write(line + "\r\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value):
    if isinstance(value, float):
        return "%.6g" % value
    return value


def _column_label(label):
    return label.replace("+", "_")


def cmd_run(args):
    if bool(args.config) == bool(args.preset):
        raise ConfigError("give exactly one of a config file or --preset")
    spec = _load_preset(args.preset) if args.preset else parse_campaign(args.config)
    if args.seed is not None:
        spec = replace(spec, master_seed=args.seed)
    if args.frames is not None:
        spec = replace(spec, frames_per_point=args.frames)

    out_dir = args.out or os.environ.get(OUT_DIR_ENV)
    if not out_dir:
        raise ConfigError("no output directory: pass --out or set $%s" % OUT_DIR_ENV)
    if os.path.exists(out_dir) and not args.force:
        raise ConfigError("output directory %r exists; use --force to overwrite" % out_dir)
    os.makedirs(out_dir, exist_ok=True)

    results = []  # (label, [CampaignMetrics ...])
    for label, sim_cfg in spec.sim_configs():
        print("running %s over %d SNR points (%d frames each)"
              % (label, len(spec.snr_db), spec.frames_per_point))
        results.append((label, run_campaign(sim_cfg, jobs=args.jobs)))

    _write_run_outputs(out_dir, spec, results)
    print("wrote results to %s" % out_dir)
    return 0


def _write_run_outputs(out_dir, spec, results):
    join = lambda name: os.path.join(out_dir, name)

    with open(join("campaign.toml"), "w", encoding="utf-8") as fh:
        fh.write(serialize_campaign(spec))

    payload = {
        "config": _campaign_dict(spec),
        "results": [
            {"mode_set": label, "points": [vars(m) for m in metrics]}
            for label, metrics in results
        ],
    }
    with open(join("metrics.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True, default=str)
        fh.write("\n")

    mode_names = [m.value for m in MimoMode]
    header = (["mode_set", "snr_db", "se", "fer", "fer_last_half", "fer_s", "fer_p",
               "top_mcs_s", "top_mcs_p"]
              + ["share_%s" % n.lower() for n in mode_names]
              + ["below_range_s", "below_range_p"])
    rows = []
    for label, metrics in results:
        for m in metrics:
            rows.append([label, _fmt(m.snr_db), _fmt(m.avg_spectral_efficiency),
                         _fmt(m.fer), _fmt(m.fer_last_half), _fmt(m.fer_s),
                         _fmt(m.fer_p), _fmt(m.top_mcs_s), _fmt(m.top_mcs_p)]
                        + [_fmt(m.mode_share.get(n, 0.0)) for n in mode_names]
                        + [m.below_range_s, m.below_range_p])
    _write_csv(join("metrics.csv"), spec, header, rows)

    labels = [label for label, _ in results]
    se_rows = []
    fer_rows = []
    for i, snr in enumerate(spec.snr_db):
        se_rows.append([_fmt(float(snr))] + [_fmt(metrics[i].avg_spectral_efficiency)
                                             for _, metrics in results])
        fer_rows.append([_fmt(float(snr))] + [_fmt(metrics[i].fer)
                                              for _, metrics in results])
    _write_csv(join("fig3_se.csv"), spec,
               ["snr_db"] + ["se_%s" % _column_label(l) for l in labels], se_rows)
    _write_csv(join("fig4_fer.csv"), spec,
               ["snr_db"] + ["fer_%s" % _column_label(l) for l in labels], fer_rows)

    pmod_only = [(l, m) for l, m in results if l == "PMOD"]
    chosen = pmod_only or [(l, m) for l, m in results if "PMOD" in l.split("+")]
    if chosen:
        _, metrics = chosen[0]
        mcs_rows = [[_fmt(float(snr)), _fmt(metrics[i].top_mcs_s),
                     _fmt(metrics[i].top_mcs_p)]
                    for i, snr in enumerate(spec.snr_db)]
        _write_csv(join("fig5_mcs.csv"), spec,
                   ["snr_db", "top_rate_symbols", "top_rate_polarization"], mcs_rows)

    with open(join("plots.gp"), "w", encoding="utf-8") as fh:
        fh.write(_gnuplot_script(labels, bool(chosen)))


def _gnuplot_script(labels, have_mcs):
    lines = [
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key bottom right",
        "set xlabel 'average SNR [dB]'",
        "",
        "set ylabel 'spectral efficiency [bit/symbol]'",
        "plot " + ", \\\n     ".join(
            "'fig3_se.csv' using 1:%d with linespoints title '%s'" % (i + 2, l)
            for i, l in enumerate(labels)),
        "pause -1",
        "",
        "set logscale y",
        "set ylabel 'frame error rate'",
        "plot " + ", \\\n     ".join(
            "'fig4_fer.csv' using 1:%d with linespoints title '%s'" % (i + 2, l)
            for i, l in enumerate(labels)),
        "pause -1",
    ]
    if have_mcs:
        lines += [
            "",
            "unset logscale y",
            "set ylabel 'most used coding rate'",
            "plot 'fig5_mcs.csv' using 1:2 with linespoints title 'symbols', \\",
            "     'fig5_mcs.csv' using 1:3 with linespoints title 'polarization'",
            "pause -1",
        ]
    return "\n".join(lines) + "\n"


def cmd_capacity(args):
    if args.preset == "fig2":
        args.start, args.stop, args.step = -10.0, 10.0, 0.5
    if args.step <= 0:
        raise ConfigError("--step must be positive")
    if args.stop < args.start:
        raise ConfigError("--stop must not be below --start")
    grid = np.arange(args.start, args.stop + args.step / 2.0, args.step)
    h_diag = np.sqrt(2.0) * np.eye(2, dtype=complex)

    rows = []
    for i, snr_db in enumerate(grid):
        gamma = db_to_lin(float(snr_db))
        pol, pol_ci = mc_polarization_mi_ci(gamma, h_diag, QPSK, args.samples,
                                            seed=np.random.SeedSequence((args.seed, 2 * i)))
        qpsk, qpsk_ci = mc_qpsk_mi_ci(gamma, args.samples,
                                      seed=np.random.SeedSequence((args.seed, 2 * i + 1)))
        rows.append([_fmt(float(snr_db)), _fmt(phi_s(gamma)), _fmt(phi_p(gamma)),
                     _fmt(diagonal_ip_bound(gamma)), _fmt(pol), _fmt(pol_ci),
                     _fmt(qpsk), _fmt(qpsk_ci)])

    header = ["gamma_db", "phi_s", "phi_p", "eq_bound", "mc_pol_mi", "mc_pol_ci95",
              "mc_qpsk_mi", "mc_qpsk_ci95"]
    out = sys.stdout if args.out is None else open(args.out, "w", newline="",
                                                   encoding="utf-8")
    try:
        out.write("# pmodsim %s\n# seed = %d, samples = %d\n"
                  % (__version__, args.seed, args.samples))
        writer = csv.writer(out)
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_tables(args):
    if args.which.upper() == "S":
        table, law, target = SYMBOL_MCS_TABLE, phi_s, lambda e: e.spectral_efficiency
        name = "symbol stream (QPSK)"
    else:
        table, law, target = POLARIZATION_MCS_TABLE, phi_p, lambda e: e.coding_rate
        name = "polarization stream"
    print("MCS table: %s" % name)
    print("%10s %20s %15s %14s" % ("rate", "spectral_efficiency", "threshold_db",
                                   "consistency"))
    for e in table.entries:
        gap = abs(law(db_to_lin(e.threshold_db)) - target(e))
        print("%10.2f %20.2f %15.2f %14.4f"
              % (e.coding_rate, e.spectral_efficiency, e.threshold_db, gap))
    return 0


def cmd_fit(args):
    grid_db = np.arange(args.start, args.stop + args.step / 2.0, args.step)
    gammas = db_to_lin(grid_db)
    h_diag = np.sqrt(2.0) * np.eye(2, dtype=complex)
    samples = []
    for i, g in enumerate(gammas):
        seed = np.random.SeedSequence((args.seed, i))
        if args.stream == "polarization":
            value, _ = mc_polarization_mi_ci(float(g), h_diag, QPSK, args.samples, seed)
        else:
            value, _ = mc_qpsk_mi_ci(float(g), args.samples, seed)
        samples.append((float(g), value))
    try:
        model = fit_exponential_capacity(samples, n_terms=args.terms)
    except FitError as exc:
        print("fit failed: %s" % exc, file=sys.stderr)
        return 1
    print("stream: %s (%d Monte Carlo samples per point)" % (args.stream, args.samples))
    print("saturation: %.4f bits" % model.saturation)
    for amp, rate in model.weights:
        print("term: amplitude %.4f, decay rate %.4f" % (amp, rate))
    print("residual rms: %.3e bits" % model.residual_rms)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pmodsim",
        description="Link adaptation simulator for dual-polarized satellite links")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a campaign and write metrics")
    p_run.add_argument("config", nargs="?", help="campaign TOML file")
    p_run.add_argument("--preset", choices=sorted(_RUN_PRESETS),
                       help="bundled campaign preset")
    p_run.add_argument("--out", help="output directory (or $%s)" % OUT_DIR_ENV)
    p_run.add_argument("--seed", type=int, help="override the master seed")
    p_run.add_argument("--frames", type=int, help="override frames per SNR point")
    p_run.add_argument("--jobs", type=int, default=1,
                       help="concurrent SNR points (default 1)")
    p_run.add_argument("--force", action="store_true",
                       help="write into an existing output directory")
    p_run.set_defaults(func=cmd_run)

    p_cap = sub.add_parser("capacity", help="capacity laws vs Monte Carlo")
    p_cap.add_argument("--start", type=float, default=-10.0, help="grid start [dB]")
    p_cap.add_argument("--stop", type=float, default=10.0, help="grid stop [dB]")
    p_cap.add_argument("--step", type=float, default=0.5, help="grid step [dB]")
    p_cap.add_argument("--samples", type=int, default=100_000,
                       help="Monte Carlo samples per point")
    p_cap.add_argument("--seed", type=int, default=0)
    p_cap.add_argument("--preset", choices=["fig2"])
    p_cap.add_argument("--out", help="CSV output path (default stdout)")
    p_cap.set_defaults(func=cmd_capacity)

    p_tab = sub.add_parser("tables", help="print the built-in MCS tables")
    p_tab.add_argument("which", choices=["S", "P", "s", "p"],
                       help="S = symbol stream, P = polarization stream")
    p_tab.set_defaults(func=cmd_tables)

    p_fit = sub.add_parser("fit", help="refit the exponential capacity models")
    p_fit.add_argument("--stream", choices=["polarization", "qpsk"],
                       default="polarization")
    p_fit.add_argument("--terms", type=int, default=1)
    p_fit.add_argument("--samples", type=int, default=50_000)
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--start", type=float, default=-12.0)
    p_fit.add_argument("--stop", type=float, default=18.0)
    p_fit.add_argument("--step", type=float, default=0.5)
    p_fit.set_defaults(func=cmd_fit)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
