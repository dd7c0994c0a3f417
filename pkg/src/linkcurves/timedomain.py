"""Causal time-domain responses from band-limited frequency transfers."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import InvalidArgument
from .netcore import FrequencyGrid, NPortS

TAPER_FRACTION = 0.10
DEFAULT_AMPLITUDE = 0.5
MIN_FMAX_OVER_F1 = 8.0


@dataclass(frozen=True, eq=False)
class TimeSeries:
    samples: np.ndarray
    dt: float
    t0: float = 0.0

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.samples))

    def __len__(self):
        return len(self.samples)


@dataclass(frozen=True, eq=False)
class PulseResponse:
    series: TimeSeries
    ui: float
    amplitude: float = DEFAULT_AMPLITUDE

    @property
    def samples_per_ui(self) -> float:
        return self.ui / self.series.dt


def band_taper(grid: FrequencyGrid, fraction: float = TAPER_FRACTION) -> np.ndarray:
    """Raised-cosine roll-off over the top ``fraction`` of the band."""
    f = grid.f
    start = (1.0 - fraction) * grid.f_max
    w = np.ones(grid.n)
    edge = f > start
    w[edge] = 0.5 * (1.0 + np.cos(np.pi * (f[edge] - start) / (grid.f_max - start)))
    return w


def dc_extrapolate(h: np.ndarray) -> float:
    """Real DC value from the two lowest bins.

    Magnitude and phase are each extended linearly to f = 0 and the result is
    projected on the real axis, so a pure delay extrapolates to exactly 1.
    """
    m1, m2 = abs(h[0]), abs(h[1])
    if m1 == 0.0:
        return 0.0
    step = np.angle(h[1] / h[0]) if m2 > 0 else 0.0
    phase0 = np.angle(h[0]) - step
    return float(max(2.0 * m1 - m2, 0.0) * np.cos(phase0))


def _spectrum(transfer, grid: FrequencyGrid) -> np.ndarray:
    h = np.asarray(transfer, dtype=complex)
    if h.shape != (grid.n,):
        raise InvalidArgument(f"transfer has shape {h.shape}, grid has {grid.n} points")
    full = np.empty(grid.n + 1, dtype=complex)
    dc = dc_extrapolate(h)
    full[0] = dc
    full[1:] = h * band_taper(grid)
    full[-1] = full[-1].real  # Nyquist bin of a real signal
    return full


def impulse_response(transfer, grid: FrequencyGrid) -> TimeSeries:
    """Impulse response density (1/s) sampled at ``dt = 1/(2 f_max)``.

    The record is ``2n`` samples long and periodic in ``1/df``.
    """
    full = _spectrum(transfer, grid)
    n2 = 2 * grid.n
    dt = 1.0 / (2.0 * grid.f_max)
    h = np.fft.irfft(full, n=n2) / dt
    return TimeSeries(h, dt, 0.0)


def step_response(transfer, grid: FrequencyGrid, amplitude: float = 1.0) -> TimeSeries:
    imp = impulse_response(transfer, grid)
    return TimeSeries(amplitude * np.cumsum(imp.samples) * imp.dt, imp.dt, imp.t0)


def _samples_per_ui(ui: float, dt: float) -> int:
    spu = ui / dt
    n = int(round(spu))
    if n < 1 or abs(spu - n) > 1e-6 * spu:
        raise InvalidArgument(f"UI is not an integer number of samples ({spu:g})")
    return n


def transfer_pulse(transfer, grid: FrequencyGrid, ui: float, amplitude: float = DEFAULT_AMPLITUDE) -> PulseResponse:
    """Response to a rectangular pulse of width ``ui`` and height ``amplitude``."""
    imp = impulse_response(transfer, grid)
    spu = _samples_per_ui(ui, imp.dt)
    # circular moving sum keeps the record periodic like the spectrum it came from
    c = np.concatenate(([0.0], np.cumsum(imp.samples)))
    total = c[-1]
    idx = np.arange(len(imp.samples))
    lo = idx - spu + 1
    wrapped = lo < 0
    window_sum = c[idx + 1] - c[np.where(wrapped, 0, lo)]
    window_sum[wrapped] += total - c[lo[wrapped] + len(idx)]
    samples = amplitude * imp.dt * window_sum
    return PulseResponse(TimeSeries(samples, imp.dt, imp.t0), ui, amplitude)


def pulse_response(top, grid: FrequencyGrid, amplitude: float = DEFAULT_AMPLITUDE) -> PulseResponse:
    """Differential pulse response of a channel topology (victim thru path)."""
    from .channel import assemble_victim

    if grid.f_max < MIN_FMAX_OVER_F1 * top.f1 * (1 - 1e-12):
        raise InvalidArgument(
            f"grid f_max {grid.f_max:g} Hz is below {MIN_FMAX_OVER_F1:g} x f1 ({top.f1:g} Hz)"
        )
    net = assemble_victim(top, grid)
    return transfer_pulse(net.param(2, 1), grid, top.ui, amplitude)


def gaussian_edge(grid: FrequencyGrid, rise_time: float) -> np.ndarray:
    """Gaussian low-pass giving a step a 10-90% rise time of ``rise_time``.

    ``rise_time = 0`` returns all ones (ideal edges).
    """
    if rise_time < 0:
        raise InvalidArgument("rise_time must be non-negative")
    sigma = rise_time / 2.563  # 10-90% rise of a gaussian step is 2.563 sigma
    return np.exp(-0.5 * (grid.omega * sigma) ** 2)


def peak_to_peak(series: TimeSeries) -> float:
    return float(np.max(series.samples) - np.min(series.samples))


DriveSide = Literal["top", "stripline"]
Stimulus = Literal["step", "pulse"]
XtalkKind = Literal["next", "fext"]


def xtalk_transfer(coupled: NPortS, drive_side: DriveSide, kind: XtalkKind) -> np.ndarray:
    """Victim transfer from an aggressor on a 4-port (v1, v2, a1, a2).

    ``top`` drives aggressor port 3, ``stripline`` drives port 4.  NEXT is
    observed on the victim port at the driven end, FEXT at the other end.
    """
    if coupled.nports != 4:
        raise InvalidArgument("crosstalk needs a 4-port network")
    if drive_side not in ("top", "stripline"):
        raise InvalidArgument(f"drive_side must be 'top' or 'stripline', got {drive_side!r}")
    if kind not in ("next", "fext"):
        raise InvalidArgument(f"kind must be 'next' or 'fext', got {kind!r}")
    src = 2 if drive_side == "top" else 3
    near = 0 if drive_side == "top" else 1
    obs = near if kind == "next" else 1 - near
    return coupled.s[:, obs, src]


def xtalk_waveform(
    coupled: NPortS,
    drive_side: DriveSide,
    stimulus: Stimulus,
    data_rate: float,
    kind: XtalkKind = "next",
    amplitude: float = 1.0,
    rise_time: float = 0.0,
) -> TimeSeries:
    h = xtalk_transfer(coupled, drive_side, kind) * gaussian_edge(coupled.grid, rise_time)
    if stimulus == "step":
        return step_response(h, coupled.grid, amplitude)
    if stimulus == "pulse":
        return transfer_pulse(h, coupled.grid, 1.0 / data_rate, amplitude).series
    raise InvalidArgument(f"stimulus must be 'step' or 'pulse', got {stimulus!r}")


def xtalk_p2p(
    coupled: NPortS,
    drive_side: DriveSide,
    stimulus: Stimulus,
    data_rate: float,
    kind: XtalkKind = "next",
    amplitude: float = 1.0,
    rise_time: float = 0.0,
) -> float:
    """Peak-to-peak victim voltage for a ``amplitude``-volt aggressor stimulus.

    The stimulus has ideal edges unless ``rise_time`` (10-90%, seconds) is set.
    """
    wave = xtalk_waveform(coupled, drive_side, stimulus, data_rate, kind, amplitude, rise_time)
    return peak_to_peak(wave)
