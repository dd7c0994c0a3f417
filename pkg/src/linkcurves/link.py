"""Ideal-DFE eye evaluation, mask checks and link performance curve sweeps."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .channel import ChannelTopology
from .elements import LumpedViaSpec, StriplineSpec, TerminalCap
from .errors import InvalidArgument
from .netcore import FrequencyGrid, make_grid
from .timedomain import DEFAULT_AMPLITUDE, PulseResponse, pulse_response

MAX_TAPS = 64
CURVE_RESOLUTION_DB = 0.5
BELOW_RANGE = float("-inf")
THREADS_ENV = "LINKCURVES_THREADS"
DEFAULT_LOSS_MAX_DB = 60.0


@dataclass(frozen=True)
class RxConfig:
    dfe_taps: int = 0
    samples_per_ui_phase_grid: int = 32

    def __post_init__(self):
        if int(self.dfe_taps) != self.dfe_taps or not 0 <= self.dfe_taps <= MAX_TAPS:
            raise InvalidArgument(f"dfe_taps must be an integer in [0, {MAX_TAPS}]")
        if self.samples_per_ui_phase_grid < 1:
            raise InvalidArgument("phase grid needs at least one phase per UI")


@dataclass(frozen=True)
class MaskSpec:
    min_eye_height: float = 0.040

    def __post_init__(self):
        if not self.min_eye_height > 0:
            raise InvalidArgument("mask height must be positive")


@dataclass(frozen=True)
class EyeResult:
    eye_height: float
    best_phase: float
    cursor: float
    dfe_tap_values: tuple
    residual_isi: float


@dataclass(frozen=True)
class PerformanceCurve:
    points: tuple  # ((rv_db, max_loss_db), ...)
    dfe_taps: int
    resolution: float = CURVE_RESOLUTION_DB

    @property
    def rv(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def max_loss(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])


@dataclass(frozen=True)
class ChannelTemplate:
    """Parametric UI-denominated channel: striplines separated by vias.

    ``loss_split`` is the fraction of stripline loss assigned to the
    dielectric; the rest is skin effect.
    """

    total_len_ui: float = 25.0
    via_positions_ui: Optional[tuple] = None
    n_vias: int = 2
    loss_split: float = 0.5
    db_rdc: float = 0.0
    skew_ui: float = 0.0
    data_rate: float = 10e9
    z_ohf: float = 50.0
    z0: float = 50.0
    via_flavor: str = "capacitive"
    term_cap: float = 0.0
    samples_per_ui: int = 32
    time_window_ui: int = 128

    def __post_init__(self):
        if self.via_positions_ui is None:
            pos = tuple(self.total_len_ui * (i + 1) / (self.n_vias + 1) for i in range(self.n_vias))
            object.__setattr__(self, "via_positions_ui", pos)
        else:
            object.__setattr__(self, "via_positions_ui", tuple(float(p) for p in self.via_positions_ui))
        if len(self.via_positions_ui) != self.n_vias:
            raise InvalidArgument("n_vias must equal the number of via positions")
        prev = 0.0
        for p in self.via_positions_ui:
            if not prev < p < self.total_len_ui:
                raise InvalidArgument("via positions must be increasing and inside (0, total_len_ui)")
            prev = p
        if not 0.0 <= self.loss_split <= 1.0:
            raise InvalidArgument("loss_split must lie in [0, 1]")
        if not self.data_rate > 0:
            raise InvalidArgument("data_rate must be positive")

    @property
    def f1(self) -> float:
        return self.data_rate / 2.0

    @property
    def ui(self) -> float:
        return 1.0 / self.data_rate

    def grid(self) -> FrequencyGrid:
        f_max = self.samples_per_ui * self.f1
        return make_grid(f_max, self.samples_per_ui * self.time_window_ui // 2)

    def segment_lengths(self) -> list[float]:
        edges = (0.0,) + self.via_positions_ui + (self.total_len_ui,)
        return [b - a for a, b in zip(edges[:-1], edges[1:])]

    def topology(self, rv_db: Optional[float], total_loss_db: float) -> ChannelTopology:
        """Channel with ``total_loss_db`` of stripline loss at f1 and vias at ``rv_db``.

        ``rv_db=None`` drops the vias (the stripline is still segmented).
        """
        f1 = self.f1
        elements: list = []
        if self.term_cap > 0:
            elements.append(TerminalCap(self.term_cap))
        lengths = self.segment_lengths()
        for i, seg in enumerate(lengths):
            share = seg / self.total_len_ui
            elements.append(
                StriplineSpec(
                    f1=f1,
                    len_ui=seg,
                    skew_ui=self.skew_ui * share,
                    z_ohf=self.z_ohf,
                    db_rdc=self.db_rdc * share,
                    db_rac=total_loss_db * (1.0 - self.loss_split) * share,
                    db_gac=total_loss_db * self.loss_split * share,
                )
            )
            if i < len(lengths) - 1 and rv_db is not None:
                elements.append(LumpedViaSpec(f1=f1, rv_db=rv_db, flavor=self.via_flavor))
        if self.term_cap > 0:
            elements.append(TerminalCap(self.term_cap))
        return ChannelTopology(self.data_rate, tuple(elements), self.z0)


def _phase_samples(pulse: PulseResponse, n_phases: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Pulse samples arranged as (phase, UI index) with the cursor UI index.

    Returns ``(table, phases, cursor_col)`` where ``table[j, k]`` is the pulse
    at ``t_peak_ui_start + phases[j]*UI + k*UI`` and the cursor column holds the
    sample nearest the pulse peak for each phase.
    """
    y = pulse.series.samples
    dt = pulse.series.dt
    n = len(y)
    spu = pulse.ui / dt
    n_ui = int(math.floor(n / spu))
    peak = int(np.argmax(y))
    t_peak = peak * dt
    phases = (np.arange(n_phases) + 0.5) / n_phases - 0.5  # centred on the peak
    t = np.mod(t_peak + phases[:, None] * pulse.ui + (np.arange(n_ui)[None, :] - n_ui // 2) * pulse.ui, n * dt)
    if abs(spu - round(spu)) < 1e-9 and n_phases == int(round(spu)):
        idx = np.rint(t / dt).astype(int) % n
        table = y[idx]
    else:
        tt = np.arange(n + 1) * dt
        yy = np.append(y, y[0])
        table = np.interp(t, tt, yy)
    return table, phases, n_ui // 2


def _eye_table(pulse: PulseResponse, taps: Sequence[int], n_phases: int):
    y = pulse.series.samples
    if not np.any(y) or not np.all(np.isfinite(y)):
        raise InvalidArgument("degenerate pulse response")
    table, phases, c = _phase_samples(pulse, n_phases)
    # samples before the cursor column (including wrapped ones) count as precursors
    h0 = table[:, c]
    post = table[:, c + 1:]
    pre_sum = np.abs(table[:, :c]).sum(axis=1)
    post_cum = np.concatenate([np.zeros((len(h0), 1)), np.cumsum(np.abs(post), axis=1)], axis=1)
    out = {}
    for n_taps in taps:
        n_taps = int(n_taps)
        if not 0 <= n_taps <= min(MAX_TAPS, post.shape[1]):
            raise InvalidArgument(f"unsupported tap count {n_taps}")
        resid = pre_sum + post_cum[:, -1] - post_cum[:, n_taps]
        out[n_taps] = (2.0 * (h0 - resid), resid)
    return out, phases, h0, post


def eye_vs_phase(pulse: PulseResponse, dfe_taps: int, n_phases: int = 32) -> tuple[np.ndarray, np.ndarray]:
    """Sampling phases (fraction of UI, 0 at the pulse peak) and eye heights."""
    out, phases, _, _ = _eye_table(pulse, [dfe_taps], n_phases)
    return phases, out[int(dfe_taps)][0]


def dfe_eye_all(pulse: PulseResponse, taps: Iterable[int], n_phases: int = 32) -> dict[int, EyeResult]:
    """Ideal-DFE eye for several tap counts from one pulse response.

    The DFE cancels postcursors 1..N exactly; residual ISI is the worst-case
    (peak-distortion) sum of every other UI-spaced sample.
    """
    out, phases, h0, post = _eye_table(pulse, list(taps), n_phases)
    res = {}
    for n_taps, (eye, resid) in out.items():
        j = int(np.argmax(eye))
        res[n_taps] = EyeResult(
            eye_height=float(eye[j]),
            best_phase=float(phases[j]),
            cursor=float(h0[j]),
            dfe_tap_values=tuple(float(v) for v in post[j, :n_taps]),
            residual_isi=float(resid[j]),
        )
    return res


def dfe_eye(pulse: PulseResponse, rx: RxConfig) -> EyeResult:
    return dfe_eye_all(pulse, [rx.dfe_taps], rx.samples_per_ui_phase_grid)[rx.dfe_taps]


def passes_mask(eye: EyeResult, mask: MaskSpec = MaskSpec()) -> bool:
    return eye.eye_height >= mask.min_eye_height


class LinkEvaluator:
    """Memoizing eye evaluator for one template.

    Pulse responses depend only on (rv, loss); eyes for every requested tap
    count are computed together and cached.
    """

    def __init__(self, template: ChannelTemplate, taps: Sequence[int], n_phases: int = 32,
                 amplitude: float = DEFAULT_AMPLITUDE):
        self.template = template
        self.taps = tuple(sorted(set(int(t) for t in taps)))
        self.n_phases = n_phases
        self.amplitude = amplitude
        self.grid = template.grid()
        self._cache: dict = {}

    def eyes(self, rv_db: Optional[float], loss_db: float) -> dict[int, EyeResult]:
        key = (rv_db, float(loss_db))
        hit = self._cache.get(key)
        if hit is None:
            top = self.template.topology(rv_db, loss_db)
            pulse = pulse_response(top, self.grid, self.amplitude)
            hit = dfe_eye_all(pulse, self.taps, self.n_phases)
            self._cache[key] = hit
        return hit

    def passes(self, rv_db, loss_db, taps: int, mask: MaskSpec) -> bool:
        return passes_mask(self.eyes(rv_db, loss_db)[taps], mask)


def max_loss_search(passes, loss_max_db: float = DEFAULT_LOSS_MAX_DB, coarse_step: float = 1.0,
                    resolution: float = CURVE_RESOLUTION_DB) -> float:
    """Largest loss on the ``resolution`` grid for which ``passes(loss)`` holds.

    Every coarse step in ``[0, loss_max_db]`` is tried, since low-loss
    channels with strong vias can fail on undamped reflections and pass at
    higher loss.  The step above the last pass is then bisected.
    """
    n_steps = int(math.floor(loss_max_db / coarse_step + 1e-9))
    lo = None
    for i in range(n_steps + 1):
        if passes(i * coarse_step):
            lo = i * coarse_step
    if lo is None:
        return BELOW_RANGE
    hi = lo + coarse_step
    if hi > loss_max_db + 1e-9:
        return lo
    while hi - lo > resolution + 1e-9:
        mid = lo + resolution * max(1, round((hi - lo) / (2 * resolution)))
        if passes(mid):
            lo = mid
        else:
            hi = mid
    return lo


def max_loss_at(rv_db: Optional[float], template: ChannelTemplate, rx: RxConfig,
                mask: MaskSpec = MaskSpec(), loss_max_db: float = DEFAULT_LOSS_MAX_DB,
                evaluator: Optional[LinkEvaluator] = None) -> float:
    """Maximum total stripline loss (dB at f1) that still passes the mask."""
    if rv_db is not None and not rv_db < 0:
        raise InvalidArgument("rv_db must be negative")
    ev = evaluator or LinkEvaluator(template, [rx.dfe_taps], rx.samples_per_ui_phase_grid)
    return max_loss_search(lambda L: ev.passes(rv_db, L, rx.dfe_taps, mask), loss_max_db)


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


def performance_curves(template: ChannelTemplate, taps: Sequence[int], rv_grid: Sequence[Optional[float]],
                       mask: MaskSpec = MaskSpec(), loss_max_db: float = DEFAULT_LOSS_MAX_DB,
                       n_phases: int = 32, threads: Optional[int] = None) -> dict[int, PerformanceCurve]:
    """One curve per tap count.  Points are computed independently per rv
    (optionally in parallel) and reduced in rv order."""
    for rv in rv_grid:
        if rv is not None and not -100.0 < rv < 0.0:
            raise InvalidArgument(f"rv value {rv} outside (-100, 0) dB")
    taps = sorted(set(int(t) for t in taps))
    order = sorted(rv_grid, key=lambda r: -math.inf if r is None else r)

    def one(rv):
        ev = LinkEvaluator(template, taps, n_phases)
        return {t: max_loss_search(lambda L: ev.passes(rv, L, t, mask), loss_max_db) for t in taps}

    n = threads if threads is not None else thread_count()
    if n > 1 and len(order) > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(one, order))
    else:
        results = [one(rv) for rv in order]
    return {
        t: PerformanceCurve(tuple((rv, res[t]) for rv, res in zip(order, results)), t)
        for t in taps
    }


def performance_curve(template: ChannelTemplate, rx: RxConfig, rv_grid: Sequence[float],
                      mask: MaskSpec = MaskSpec(), loss_max_db: float = DEFAULT_LOSS_MAX_DB,
                      threads: Optional[int] = None) -> PerformanceCurve:
    for rv in rv_grid:
        if not -40.0 < rv < 0.0:
            raise InvalidArgument("rv_grid values must lie in (-40, 0) dB")
    return performance_curves(template, [rx.dfe_taps], rv_grid, mask, loss_max_db,
                              rx.samples_per_ui_phase_grid, threads)[rx.dfe_taps]
