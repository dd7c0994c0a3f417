"""Command-line front end.

    linkcurves <command> [--config FILE] [--out DIR] [--taps 0,3,12] [--rate-gbps N]

Commands: sparams, pulse, eye, brv, curve, study <name>.  Exit status is 1
for configuration or argument errors and 2 for numerical degeneracy.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from .channel import (
    ChannelTopology,
    coupled_index,
    assemble_coupled,
    assemble_victim,
    broadband_xtalk,
    crosstalk_trace,
    hull_points,
    metrics,
)
from .config import RunConfig, read_config
from .errors import LinkCurvesError, NumericalDegeneracy, UnsupportedTopology
from .link import RxConfig, dfe_eye_all, eye_vs_phase, passes_mask, performance_curves
from .netcore import db, make_grid
from .plotting import PlotSpec, Series, write_svg
from .studies import STUDIES, StudyTable
from .timedomain import pulse_response
from .touchstone import touchstone_write

PROG = "linkcurves"
DB_UNIT = "dB 20log10(V)"
_UNITS = {
    "rv_db": DB_UNIT, "max_loss_db": DB_UNIT, "il_at_nyquist_db": DB_UNIT, "rv_at_nyquist_db": DB_UNIT,
    "brv_db": DB_UNIT, "crosstalk_db": DB_UNIT, "s11_db": DB_UNIT, "s21_db": DB_UNIT,
    "hull_db": DB_UNIT, "broadband_db": DB_UNIT, "il_ripple_db": DB_UNIT,
    "total_delay_s": "s", "time_s": "s", "frequency_hz": "Hz", "volts": "V",
    "eye_mv": "mV", "cursor_mv": "mV", "residual_isi_mv": "mV", "freq_mv": "mV",
    "pulse_p2p_mv": "mV", "step_p2p_mv": "mV",
    "best_phase_ui": "UI", "spacing_ui": "UI", "skew_ui": "UI", "stub_mm": "mm",
    "taps": "count", "dfe_taps": "count", "n_vias": "count", "dielectric_fraction": "1",
}


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "-inf" if v < 0 else "inf"
        return f"{float(v):.12g}"
    return str(v)


def write_csv(path: str, columns: Sequence[str], rows) -> None:
    header = [f"{c} [{_UNITS[c]}]" if c in _UNITS else c for c in columns]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(v) for v in r])


def _grid(cfg: RunConfig):
    f1 = cfg.data_rate / 2.0
    return make_grid(cfg.samples_per_ui * f1, cfg.samples_per_ui * cfg.time_window_ui // 2)


def _out(args, name: str) -> str:
    return os.path.join(args.out, name)


def _taps(args, cfg: RunConfig) -> tuple:
    return args.taps if args.taps is not None else cfg.dfe_taps


def _has_coupling(top: ChannelTopology) -> bool:
    try:
        coupled_index(top)
    except UnsupportedTopology:
        return False
    return top.aggressor_route != "none"


def cmd_sparams(args, cfg: RunConfig) -> None:
    top = cfg.topology()
    grid = _grid(cfg)
    net = assemble_victim(top, grid)
    touchstone_write(net, _out(args, "channel.s2p"))
    m = metrics(top, grid)
    cols = ["il_at_nyquist_db", "rv_at_nyquist_db", "brv_db", "total_delay_s"]
    row = [m.il_at_nyquist, m.rv_at_nyquist, m.brv, m.total_delay]
    if _has_coupling(top):
        net4 = assemble_coupled(top, grid)
        touchstone_write(net4, _out(args, "channel.s4p"))
        cols.append("crosstalk_db")
        row.append(broadband_xtalk(db(crosstalk_trace(net4, top.aggressor_route)), grid, top.f1))
    write_csv(_out(args, "metrics.csv"), cols, [row])
    ghz = grid.f / 1e9
    write_svg(PlotSpec(
        "spectrum",
        (Series("|Sdd21|", ghz, db(net.param(2, 1))), Series("|Sdd11|", ghz, db(net.param(1, 1)))),
        "frequency (GHz)", "magnitude (dB)", "Differential S-parameters",
    ), _out(args, "sparams.svg"), cfg.digest())


def cmd_pulse(args, cfg: RunConfig) -> None:
    top = cfg.topology()
    pulse = pulse_response(top, _grid(cfg))
    t = pulse.series.t
    write_csv(_out(args, "pulse.csv"), ["time_s", "volts"], zip(t, pulse.series.samples))
    write_svg(PlotSpec(
        "timeseries", (Series("pulse", t * 1e9, pulse.series.samples),),
        "time (ns)", "voltage (V)", f"Pulse response, {cfg.data_rate_gbps:g} Gb/s",
    ), _out(args, "pulse.svg"), cfg.digest())


def cmd_eye(args, cfg: RunConfig) -> None:
    top = cfg.topology()
    pulse = pulse_response(top, _grid(cfg))
    mask = cfg.mask()
    taps = _taps(args, cfg)
    eyes = dfe_eye_all(pulse, taps)
    rows, series = [], []
    for t in taps:
        e = eyes[t]
        status = "pass" if passes_mask(e, mask) else "fail"
        rows.append([status, e.eye_height * 1e3, e.cursor * 1e3, e.residual_isi * 1e3, e.best_phase, t])
        print(f"{status},eye_mv={e.eye_height * 1e3:.3f},taps={t}")
        ph, eye = eye_vs_phase(pulse, t)
        series.append(Series(f"{t} taps", ph, eye * 1e3))
    write_csv(_out(args, "eye.csv"),
              ["status", "eye_mv", "cursor_mv", "residual_isi_mv", "best_phase_ui", "dfe_taps"], rows)
    write_svg(PlotSpec(
        "curve", tuple(series), "sampling phase (UI from pulse peak)", "eye height (mV)",
        "Ideal-DFE eye height", hlines=((cfg.min_eye_mv, "mask"),),
    ), _out(args, "eye.svg"), cfg.digest())


def cmd_brv(args, cfg: RunConfig) -> None:
    top = cfg.topology()
    grid = _grid(cfg)
    s11 = db(assemble_victim(top, grid).param(1, 1))
    m = metrics(top, grid)
    write_csv(_out(args, "brv.csv"), ["frequency_hz", "s11_db"], zip(grid.f, s11))
    write_csv(_out(args, "brv_metrics.csv"), ["rv_at_nyquist_db", "brv_db"], [[m.rv_at_nyquist, m.brv]])
    print(f"brv_db={m.brv:.3f},rv_at_nyquist_db={m.rv_at_nyquist:.3f}")
    hx, hy = hull_points(s11, grid, top.f1)
    keep = grid.f <= 4 * top.f1
    series = [Series("|Sdd11|", grid.f[keep] / 1e9, s11[keep])]
    if len(hx):
        series.append(Series("hull", hx / 1e9, hy, "o--"))
    series.append(Series("BRV at f1", [top.f1 / 1e9], [m.brv], "s"))
    write_svg(PlotSpec("spectrum", tuple(series), "frequency (GHz)", "reflection (dB)",
                       "Broadband reflected voltage"), _out(args, "brv.svg"), cfg.digest())


def cmd_curve(args, cfg: RunConfig) -> None:
    tpl = cfg.channel_template()
    taps = _taps(args, cfg)
    curves = performance_curves(tpl, taps, cfg.sweep.rv_grid(), cfg.mask(), cfg.sweep.loss_max_db)
    rows = [(t, rv, ml) for t in taps for rv, ml in curves[t].points]
    write_csv(_out(args, "curve.csv"), ["taps", "rv_db", "max_loss_db"], rows)
    series = tuple(Series(f"{t} DFE taps", curves[t].rv, curves[t].max_loss, "o-") for t in taps)
    write_svg(PlotSpec("curve", series, "via reflected voltage (dB)", "max total stripline loss (dB)",
                       "Link performance curves"), _out(args, "curve.svg"), cfg.digest())


def _study_plot(table: StudyTable) -> PlotSpec:
    def group(key, x, y, style="o-", fmt="{}"):
        labels = list(dict.fromkeys(table.column(key)))
        out = []
        for lab in labels:
            sub = table.where(**{key: lab})
            out.append(Series(fmt.format(lab), sub.column(x), sub.column(y), style))
        return tuple(out)

    if table.name == "via-spacing":
        return PlotSpec("curve", group("placement", "rv_db", "max_loss_db"),
                        "via reflected voltage (dB)", "max total stripline loss (dB)", "Via spacing")
    if table.name == "loss-split":
        return PlotSpec("curve", group("split", "taps", "max_loss_db"),
                        "DFE taps", "max total stripline loss (dB)", "Loss mechanism split")
    if table.name == "skew":
        return PlotSpec("curve", group("vias", "skew_ui", "max_loss_db"),
                        "P/N skew (UI)", "max total stripline loss (dB)", "Skew sensitivity")
    if table.name == "via-count":
        return PlotSpec("curve", group("n_vias", "rv_db", "max_loss_db", fmt="{} vias"),
                        "via reflected voltage (dB)", "max total stripline loss (dB)", "Via count")
    series = []
    for drive in ("top", "stripline"):
        for kind in ("next", "fext"):
            sub = table.where(drive=drive, kind=kind)
            series.append(Series(f"{kind.upper()} {drive} freq", sub.column("stub_mm"), sub.column("freq_mv"), "o--"))
            series.append(Series(f"{kind.upper()} {drive} pulse", sub.column("stub_mm"),
                                 sub.column("pulse_p2p_mv"), "s-"))
    return PlotSpec("curve", tuple(series), "via stub length (mm)", "crosstalk (mV)",
                    "Crosstalk, frequency vs time domain")


def cmd_study(args, cfg: RunConfig) -> None:
    name = args.name
    tpl = cfg.channel_template()
    taps = _taps(args, cfg) if args.taps is not None else None
    rx = RxConfig(taps[0] if taps else 3)
    mask = cfg.mask()
    lmax = cfg.sweep.loss_max_db
    if name == "via-spacing":
        table = STUDIES[name](rx, tpl, cfg.sweep.rv_grid(), mask, lmax)
    elif name == "via-count":
        table = STUDIES[name](rx, tpl, cfg.sweep.rv_grid(), mask=mask, loss_max_db=lmax)
    elif name == "loss-split":
        table = STUDIES[name](taps or tuple(range(13)), tpl, mask, lmax)
    elif name == "skew":
        table = STUDIES[name](rx, tpl, mask=mask, loss_max_db=lmax)
    else:
        rate = args.rate_gbps * 1e9 if args.rate_gbps is not None else 20e9
        table = STUDIES[name](data_rate=rate, samples_per_ui=cfg.samples_per_ui,
                              time_window_ui=cfg.time_window_ui)
    stem = "study_" + name.replace("-", "_")
    write_csv(_out(args, stem + ".csv"), table.columns, table.rows)
    write_svg(_study_plot(table), _out(args, stem + ".svg"), cfg.digest())


COMMANDS = {
    "sparams": cmd_sparams,
    "pulse": cmd_pulse,
    "eye": cmd_eye,
    "brv": cmd_brv,
    "curve": cmd_curve,
    "study": cmd_study,
}


def _parse_taps(text: str) -> tuple:
    try:
        taps = tuple(sorted({int(t) for t in text.split(",") if t.strip()}))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tap list {text!r}") from None
    if not taps:
        raise argparse.ArgumentTypeError("empty tap list")
    return taps


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1 so that 2 stays reserved for numerical degeneracy."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="YAML or JSON run configuration (default: baseline channel)")
    common.add_argument("--out", default=".", help="output directory (created if missing)")
    common.add_argument("--taps", type=_parse_taps, help="comma-separated DFE tap counts, e.g. 0,3,12")
    common.add_argument("--rate-gbps", type=float, help="override the data rate in Gb/s")
    p = _Parser(prog=PROG, description="SerDes link performance curves")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "sparams": "write Touchstone files and channel metrics",
        "pulse": "write the differential pulse response",
        "eye": "evaluate the ideal-DFE eye against the mask",
        "brv": "write |Sdd11| and its broadband reflected voltage",
        "curve": "sweep link performance curves",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    sp = sub.add_parser("study", parents=[common], help="run a channel behaviour study")
    sp.add_argument("name", choices=sorted(STUDIES))
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = read_config(args.config) if args.config else RunConfig()
        cfg = cfg.with_rate(args.rate_gbps)
        if args.taps is not None:
            RxConfig(max(args.taps))
        os.makedirs(args.out, exist_ok=True)
        COMMANDS[args.command](args, cfg)
    except NumericalDegeneracy as exc:
        print(f"{PROG}: numerical degeneracy: {exc}", file=sys.stderr)
        return 2
    except LinkCurvesError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
