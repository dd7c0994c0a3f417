"""Channel behaviour studies built on the performance-curve sweep.

Each runner returns a :class:`StudyTable`; column names carry their units
and dB values follow the 20*log10 voltage convention.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .channel import assemble_victim, broadband_xtalk
from .elements import TlineViaSpec, tline_via_4port
from .errors import InvalidArgument
from .link import (
    DEFAULT_LOSS_MAX_DB,
    ChannelTemplate,
    LinkEvaluator,
    MaskSpec,
    RxConfig,
    max_loss_search,
    performance_curves,
)
from .netcore import db, make_grid
from .timedomain import xtalk_p2p, xtalk_transfer

DEFAULT_RV_GRID = tuple(float(v) for v in range(-20, -1))  # -20 ... -2 dB, 19 points
SPACING_PLACEMENTS = {
    "center-2ui": (11.5, 13.5),
    "equal-8.33ui": (25.0 / 3.0, 50.0 / 3.0),
    "ends-23ui": (1.0, 24.0),
}
LOSS_SPLITS = {"all-skin": 0.0, "half": 0.5, "all-dielectric": 1.0}
SKEWS_UI = (0.0, 0.1, 0.3, 0.5)
SKEW_VIA_RV_DB = -4.0
VIA_COUNTS = (2, 3, 4)
RIPPLE_REF_LOSS_DB = 10.0
RIPPLE_REF_RV_DB = -6.0
XTALK_STUBS_MM = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0)


@dataclass(frozen=True)
class StudyTable:
    name: str
    columns: tuple
    rows: tuple

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def where(self, **match) -> "StudyTable":
        idx = {k: self.columns.index(k) for k in match}
        rows = tuple(r for r in self.rows if all(r[i] == match[k] for k, i in idx.items()))
        return StudyTable(self.name, self.columns, rows)


def il_ripple_near_f1(template: ChannelTemplate, rv_db: float = RIPPLE_REF_RV_DB,
                      total_loss_db: float = RIPPLE_REF_LOSS_DB, band: float = 0.5) -> float:
    """Peak-to-peak |S21| ripple (dB) in ``[(1-band) f1, (1+band) f1]``.

    The smooth stripline trend is removed with a straight-line fit in dB.
    """
    grid = template.grid()
    net = assemble_victim(template.topology(rv_db, total_loss_db), grid)
    f = grid.f
    sel = (f >= (1 - band) * template.f1) & (f <= (1 + band) * template.f1)
    y = db(net.param(2, 1))[sel]
    x = f[sel] / template.f1
    resid = y - np.polyval(np.polyfit(x, y, 1), x)
    return float(resid.max() - resid.min())


def _curve_rows(label, template, taps, rv_grid, mask, loss_max_db, threads):
    curves = performance_curves(template, [taps], rv_grid, mask, loss_max_db, threads=threads)
    return [(label, rv, ml) for rv, ml in curves[taps].points]


def study_via_spacing(rx: RxConfig = RxConfig(3), template: ChannelTemplate = ChannelTemplate(),
                      rv_grid: Sequence[float] = DEFAULT_RV_GRID, mask: MaskSpec = MaskSpec(),
                      loss_max_db: float = DEFAULT_LOSS_MAX_DB, threads: Optional[int] = None) -> StudyTable:
    """Two vias placed centrally (2 UI apart), equally spaced, or near the ends."""
    rows = []
    for label, pos in SPACING_PLACEMENTS.items():
        tpl = replace(template, total_len_ui=25.0, n_vias=2, via_positions_ui=pos)
        ripple = il_ripple_near_f1(tpl)
        for _, rv, ml in _curve_rows(label, tpl, rx.dfe_taps, rv_grid, mask, loss_max_db, threads):
            rows.append((label, pos[1] - pos[0], rv, ml, ripple))
    return StudyTable(
        "via-spacing",
        ("placement", "spacing_ui", "rv_db", "max_loss_db", "il_ripple_db"),
        tuple(rows),
    )


def study_loss_split(taps: Sequence[int] = tuple(range(13)), template: ChannelTemplate = ChannelTemplate(),
                     mask: MaskSpec = MaskSpec(), loss_max_db: float = DEFAULT_LOSS_MAX_DB) -> StudyTable:
    """Via-free channel with all-skin, half-and-half or all-dielectric loss."""
    rows = []
    for label, split in LOSS_SPLITS.items():
        tpl = replace(template, n_vias=0, via_positions_ui=None, loss_split=split)
        ev = LinkEvaluator(tpl, taps)
        for t in ev.taps:
            ml = max_loss_search(lambda L: ev.passes(None, L, t, mask), loss_max_db)
            rows.append((label, split, t, ml))
    return StudyTable("loss-split", ("split", "dielectric_fraction", "taps", "max_loss_db"), tuple(rows))


def study_skew(rx: RxConfig = RxConfig(3), template: ChannelTemplate = ChannelTemplate(),
               skews: Sequence[float] = SKEWS_UI, mask: MaskSpec = MaskSpec(),
               loss_max_db: float = DEFAULT_LOSS_MAX_DB) -> StudyTable:
    """P/N skew spread over the segments, with two -4 dB vias and with none."""
    rows = []
    for skew in skews:
        for label, n_vias, rv in (("vias", 2, SKEW_VIA_RV_DB), ("no-vias", 0, None)):
            tpl = replace(template, n_vias=n_vias, via_positions_ui=None, skew_ui=skew)
            ev = LinkEvaluator(tpl, [rx.dfe_taps])
            ml = max_loss_search(lambda L: ev.passes(rv, L, rx.dfe_taps, mask), loss_max_db)
            rows.append((skew, label, rv if rv is not None else float("nan"), ml))
    return StudyTable("skew", ("skew_ui", "vias", "rv_db", "max_loss_db"), tuple(rows))


def study_via_count(rx: RxConfig = RxConfig(3), template: ChannelTemplate = ChannelTemplate(),
                    rv_grid: Sequence[float] = DEFAULT_RV_GRID, counts: Sequence[int] = VIA_COUNTS,
                    mask: MaskSpec = MaskSpec(), loss_max_db: float = DEFAULT_LOSS_MAX_DB,
                    threads: Optional[int] = None) -> StudyTable:
    rows = []
    for n in counts:
        tpl = replace(template, n_vias=n, via_positions_ui=None)
        for _, rv, ml in _curve_rows(n, tpl, rx.dfe_taps, rv_grid, mask, loss_max_db, threads):
            rows.append((n, rv, ml))
    return StudyTable("via-count", ("n_vias", "rv_db", "max_loss_db"), tuple(rows))


def xtalk_grid(data_rate: float, samples_per_ui: int = 32, time_window_ui: int = 128):
    f1 = data_rate / 2.0
    return make_grid(samples_per_ui * f1, samples_per_ui * time_window_ui // 2)


def study_xtalk_freq_vs_time(
    data_rate: float = 20e9,
    stubs_mm: Sequence[float] = XTALK_STUBS_MM,
    barrel_mm: float = 3.0,
    z_diff: float = 100.0,
    er: float = 3.5,
    k_xtalk: float = 0.02,
    samples_per_ui: int = 32,
    time_window_ui: int = 128,
    rise_ui: float = 0.0,
) -> StudyTable:
    """Broadband crosstalk (mV for a 1 V aggressor swing) against transient p2p.

    The frequency figure is ``10**(dB/20)`` volts: a 1 V peak-to-peak
    sinusoid at f1 couples ``|X(f1)|`` volts peak-to-peak onto the victim.
    The transient stimulus has ideal edges unless ``rise_ui`` is set.
    """
    if not data_rate > 0:
        raise InvalidArgument("data_rate must be positive")
    f1 = data_rate / 2.0
    grid = xtalk_grid(data_rate, samples_per_ui, time_window_ui)
    rise = rise_ui / data_rate
    rows = []
    for stub in stubs_mm:
        spec = TlineViaSpec(barrel_mm * 1e-3, stub * 1e-3, z_leg=z_diff / 2.0, er=er, k_xtalk=k_xtalk)
        net = tline_via_4port(spec, grid, z_diff / 2.0)
        for side in ("top", "stripline"):
            for kind in ("next", "fext"):
                bx = broadband_xtalk(db(xtalk_transfer(net, side, kind)), grid, f1)
                rows.append((
                    float(stub), side, kind, bx,
                    1e3 * 10.0 ** (bx / 20.0),
                    1e3 * xtalk_p2p(net, side, "pulse", data_rate, kind, rise_time=rise),
                    1e3 * xtalk_p2p(net, side, "step", data_rate, kind, rise_time=rise),
                ))
    return StudyTable(
        "xtalk-fvt",
        ("stub_mm", "drive", "kind", "broadband_db", "freq_mv", "pulse_p2p_mv", "step_p2p_mv"),
        tuple(rows),
    )


STUDIES = {
    "via-spacing": study_via_spacing,
    "loss-split": study_loss_split,
    "skew": study_skew,
    "via-count": study_via_count,
    "xtalk-fvt": study_xtalk_freq_vs_time,
}
