"""Command-line driver: ``radpair --config run.toml <command>``.

Exit codes: 0 success, 2 config/validation error, 3 I/O error,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import csvio, plotting
from .config import RunConfig, dump_config, load_config
from .dynamics import initial_radical_pair_state, model_propagator
from .entanglement import TRACE_FLOOR, electron_concurrence_raw
from .exceptions import NumericalError, ValidationError
from .magnetometry import (
    LifetimeCurve,
    SensitivityReport,
    bound_violation_scan,
    two_pass_sweep,
)
from .spin_core import singlet_projector

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL = 0, 2, 3, 4


class _IOFailure(Exception):
    pass


def _outdir(args, cfg: RunConfig) -> Path:
    out = Path(args.out if args.out is not None else cfg.output.directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _IOFailure(f"cannot create output directory {out}: {exc}") from None
    if not os.access(out, os.W_OK):
        raise _IOFailure(f"output directory {out} is not writable")
    return out


def _write_text(path: Path, text: str) -> Path:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)
    return path


def _check_failures(*curves: LifetimeCurve | None):
    bad = [f for c in curves if c is not None for f in c.failures]
    if bad:
        lines = "\n".join(f"  B = {b:.9g} mT: {note}" for b, note in bad)
        raise NumericalError(f"{len(bad)} sweep point(s) failed:\n{lines}")


def cmd_simulate(cfg: RunConfig, args) -> int:
    out = _outdir(args, cfg)
    model = cfg.model_template().with_field(args.field)
    layout = model.layout
    times = cfg.lifetime_settings().grid()
    prop = model_propagator(model, initial_radical_pair_state(layout))
    states = prop.states(times)
    traces = np.trace(states, axis1=1, axis2=2).real
    alive = traces >= TRACE_FLOOR
    n = int(np.argmin(alive)) if not alive.all() else times.size
    if n < times.size:
        print(f"warning: all pairs reacted by t = {times[n]:.9g} ns; "
              "trajectory truncated", file=sys.stderr)
    states, traces, times = states[:n], traces[:n], times[:n]
    Q_S = singlet_projector(layout)
    p_s = np.einsum("ij,tji->t", Q_S, states).real / traces
    conc = np.clip(electron_concurrence_raw(states, layout, model.has_recombination),
                   0.0, 1.0)
    if "csv" in cfg.formats:
        path = out / f"trajectory_B{csvio.fmt(args.field)}.csv"
        csvio.write_trajectory_csv(path, times, traces, p_s, conc)
        print(path)
    return EXIT_OK


def _sweep_passes(cfg: RunConfig, args, zoom: bool):
    return two_pass_sweep(
        cfg.model_template(), cfg.field_grid(), cfg.lifetime_settings(),
        zoom=zoom, zoom_halfwidth=cfg.sweep.zoom_halfwidth,
        zoom_step=cfg.sweep.zoom_step, jobs=args.jobs,
    )


def cmd_sweep(cfg: RunConfig, args) -> int:
    out = _outdir(args, cfg)
    coarse, fine = _sweep_passes(cfg, args, cfg.sweep.zoom)
    _check_failures(coarse, fine)
    if "csv" in cfg.formats:
        print(csvio.write_sweep_csv(out / "sweep.csv", coarse))
        if fine is not None:
            print(csvio.write_sweep_csv(out / "sweep_zoom.csv", fine))
    if "svg" in cfg.formats:
        fig = plotting.lifetime_figure(
            coarse.B_grid, coarse.T_E,
            None if fine is None else fine.B_grid, None if fine is None else fine.T_E)
        print(_write_text(out / "sweep.svg", fig))
    return EXIT_OK


def summarize(reports: list[tuple[str, SensitivityReport]]) -> str:
    lines = []
    worst = min(rep.min_r for _, rep in reports)
    for name, rep in reports:
        lines.append(f"[{name}]")
        lines.append(f"grid_step_mT = {csvio.fmt(rep.grid_step)}")
        lines.append(f"min_r = {csvio.fmt(rep.min_r)}")
        lines.append(f"argmin_B_mT = {csvio.fmt(rep.argmin_B)}")
        spans = "; ".join(f"{csvio.fmt(a)}..{csvio.fmt(b)}" for a, b in rep.violations)
        lines.append(f"violation_intervals_mT = {spans or 'none'}")
    if worst < 1:
        lines.append(f"VIOLATION: min r = {csvio.fmt(worst)} < 1")
    else:
        lines.append("no violation")
    return "\n".join(lines) + "\n"


def cmd_scan(cfg: RunConfig, args) -> int:
    out = _outdir(args, cfg)
    params = cfg.metrology_params()
    if args.curve_csv:
        try:
            passes = [("injected", csvio.read_curve_csv(args.curve_csv))]
        except OSError as exc:
            raise _IOFailure(f"cannot read {args.curve_csv}: {exc}") from None
    else:
        coarse, fine = _sweep_passes(cfg, args, cfg.sweep.zoom)
        _check_failures(coarse, fine)
        passes = [("coarse", coarse)] + ([("zoom", fine)] if fine is not None else [])

    reports = [(name, bound_violation_scan(curve, params)) for name, curve in passes]
    names = {"coarse": "scan", "injected": "scan", "zoom": "scan_zoom"}
    for name, rep in reports:
        stem = names[name]
        if "csv" in cfg.formats:
            print(csvio.write_scan_csv(out / f"{stem}.csv", rep))
        if "svg" in cfg.formats:
            B = [r.B for r in rep.records]
            fig = plotting.scan_figure(B, [r.T_E for r in rep.records],
                                       [r.r for r in rep.records])
            print(_write_text(out / f"{stem}.svg", fig))
    summary = summarize(reports)
    _write_text(out / "scan_summary.txt", summary)
    sys.stdout.write(summary)
    return EXIT_OK


def cmd_figure1b(cfg: RunConfig, args) -> int:
    if cfg.model.nuclei != 1:
        raise ValidationError("figure1b needs a configuration with exactly one nucleus")
    out = _outdir(args, cfg)
    coarse, fine = _sweep_passes(cfg, args, True)
    _check_failures(coarse, fine)
    if "csv" in cfg.formats:
        print(csvio.write_sweep_csv(out / "figure1b.csv", coarse))
        if fine is not None:
            print(csvio.write_sweep_csv(out / "figure1b_zoom.csv", fine))
    if "svg" in cfg.formats:
        zoom_B, zoom_T = (None, None) if fine is None else (fine.B_grid, fine.T_E)
        fig = plotting.lifetime_figure(coarse.B_grid, coarse.T_E, zoom_B, zoom_T,
                                       title="T_E vs B, one spin-1/2 nucleus")
        print(_write_text(out / "figure1b.svg", fig))
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "scan": cmd_scan,
    "figure1b": cmd_figure1b,
}


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="run configuration (TOML)")
    common.add_argument("--out", default=argparse.SUPPRESS,
                        help="output directory (default: [output].directory, ./out)")
    common.add_argument("--jobs", type=_positive_int, default=argparse.SUPPRESS,
                        help="worker processes for sweeps (default: CPU count)")
    common.add_argument("--print-config", action="store_true", default=argparse.SUPPRESS,
                        help="echo the validated configuration and exit")

    parser = argparse.ArgumentParser(
        prog="radpair", parents=[common],
        description="Radical-pair entanglement lifetime and field-sensitivity audit.")
    sub = parser.add_subparsers(dest="command")
    p = sub.add_parser("simulate", parents=[common], help="one trajectory at a fixed field")
    p.add_argument("--field", type=float, required=True, help="field in mT")
    sub.add_parser("sweep", parents=[common], help="T_E over the configured field grid")
    p = sub.add_parser("scan", parents=[common], help="sensitivity-ratio audit")
    p.add_argument("--curve-csv", help="audit this B_mT,TE_ns,censored curve instead")
    sub.add_parser("figure1b", parents=[common], help="two-pass T_E(B) figure")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("config", None), ("out", None), ("print_config", False),
                          ("jobs", os.cpu_count() or 1), ("curve_csv", None)):
        if not hasattr(args, name):
            setattr(args, name, default)
    if args.config is None:
        parser.print_usage(sys.stderr)
        print("radpair: error: --config is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.print_config:
        sys.stdout.write(dump_config(cfg))
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("radpair: error: a command is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg, args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _IOFailure as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
