"""Frequency grids, two-port ABCD algebra and S-parameter networks.

All networks are stored as stacks of per-frequency matrices with shape
``(n_freq, p, p)``.  Values are never mutated after construction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, NumericalDegeneracy

DEFAULT_Z0 = 50.0


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Uniform frequency axis ``f[k] = (k + 1) * df`` with no DC point."""

    df: float
    n: int

    @property
    def f(self) -> np.ndarray:
        return np.arange(1, self.n + 1, dtype=float) * self.df

    @property
    def f_max(self) -> float:
        return self.n * self.df

    @property
    def omega(self) -> np.ndarray:
        return 2.0 * np.pi * self.f

    def index_of(self, freq: float) -> int:
        """Index of the grid point closest to ``freq``."""
        k = int(round(freq / self.df)) - 1
        return min(max(k, 0), self.n - 1)

    def same_as(self, other: "FrequencyGrid") -> bool:
        return self.n == other.n and self.df == other.df

    def __eq__(self, other):
        return isinstance(other, FrequencyGrid) and self.same_as(other)

    def __hash__(self):
        return hash((self.df, self.n))


def make_grid(f_max: float, n: int) -> FrequencyGrid:
    if not np.isfinite(f_max) or f_max <= 0:
        raise InvalidArgument(f"f_max must be positive, got {f_max!r}")
    if int(n) != n or n < 2:
        raise InvalidArgument(f"n must be an integer >= 2, got {n!r}")
    return FrequencyGrid(df=f_max / n, n=int(n))


def _check_grids(*grids: FrequencyGrid) -> None:
    first = grids[0]
    for g in grids[1:]:
        if not first.same_as(g):
            raise InvalidArgument("networks are defined on different frequency grids")


@dataclass(frozen=True, eq=False)
class TwoPortABCD:
    m: np.ndarray  # (n, 2, 2) complex
    grid: FrequencyGrid

    def __post_init__(self):
        if self.m.shape != (self.grid.n, 2, 2):
            raise InvalidArgument(
                f"ABCD stack has shape {self.m.shape}, expected ({self.grid.n}, 2, 2)"
            )

    @property
    def det(self) -> np.ndarray:
        m = self.m
        return m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]


@dataclass(frozen=True, eq=False)
class NPortS:
    s: np.ndarray  # (n, p, p) complex
    grid: FrequencyGrid
    z_ref: float = DEFAULT_Z0

    def __post_init__(self):
        if self.s.ndim != 3 or self.s.shape[0] != self.grid.n or self.s.shape[1] != self.s.shape[2]:
            raise InvalidArgument(f"S stack has shape {self.s.shape} for a {self.grid.n}-point grid")
        if not self.z_ref > 0:
            raise InvalidArgument("z_ref must be positive")

    @property
    def nports(self) -> int:
        return self.s.shape[1]

    def param(self, i: int, j: int) -> np.ndarray:
        """1-based S_ij trace, e.g. ``net.param(2, 1)`` for S21."""
        return self.s[:, i - 1, j - 1]


def identity_abcd(grid: FrequencyGrid) -> TwoPortABCD:
    m = np.zeros((grid.n, 2, 2), dtype=complex)
    m[:, 0, 0] = 1.0
    m[:, 1, 1] = 1.0
    return TwoPortABCD(m, grid)


def _as_trace(values, grid: FrequencyGrid) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(values, dtype=complex), (grid.n,))
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument("element value is not finite on the grid")
    return arr


def shunt_admittance_abcd(y, grid: FrequencyGrid) -> TwoPortABCD:
    y = _as_trace(y, grid)
    m = np.zeros((grid.n, 2, 2), dtype=complex)
    m[:, 0, 0] = 1.0
    m[:, 1, 0] = y
    m[:, 1, 1] = 1.0
    return TwoPortABCD(m, grid)


def series_impedance_abcd(z, grid: FrequencyGrid) -> TwoPortABCD:
    z = _as_trace(z, grid)
    m = np.zeros((grid.n, 2, 2), dtype=complex)
    m[:, 0, 0] = 1.0
    m[:, 0, 1] = z
    m[:, 1, 1] = 1.0
    return TwoPortABCD(m, grid)


def line_abcd(gamma_l, zc, grid: FrequencyGrid) -> TwoPortABCD:
    """Uniform line section from total propagation ``gamma*length`` and Zc."""
    gl = _as_trace(gamma_l, grid)
    zc = _as_trace(zc, grid)
    ch, sh = np.cosh(gl), np.sinh(gl)
    m = np.empty((grid.n, 2, 2), dtype=complex)
    m[:, 0, 0] = ch
    m[:, 0, 1] = zc * sh
    m[:, 1, 0] = sh / zc
    m[:, 1, 1] = ch
    return TwoPortABCD(m, grid)


def cascade(*nets: TwoPortABCD) -> TwoPortABCD:
    """Chain two-ports left to right (per-frequency matrix product)."""
    if not nets:
        raise InvalidArgument("cascade needs at least one network")
    _check_grids(*(n.grid for n in nets))
    m = nets[0].m
    for other in nets[1:]:
        m = m @ other.m
    return TwoPortABCD(m, nets[0].grid)


def abcd_to_s(net: TwoPortABCD, z_ref: float = DEFAULT_Z0) -> NPortS:
    if not z_ref > 0:
        raise InvalidArgument("z_ref must be positive")
    a, b, c, d = net.m[:, 0, 0], net.m[:, 0, 1], net.m[:, 1, 0], net.m[:, 1, 1]
    den = a + b / z_ref + c * z_ref + d
    if np.any(np.abs(den) < 1e-300) or not np.all(np.isfinite(den)):
        raise NumericalDegeneracy("ABCD to S conversion hit a singular denominator")
    s = np.empty_like(net.m)
    s[:, 0, 0] = (a + b / z_ref - c * z_ref - d) / den
    s[:, 0, 1] = 2.0 * (a * d - b * c) / den
    s[:, 1, 0] = 2.0 / den
    s[:, 1, 1] = (-a + b / z_ref - c * z_ref + d) / den
    return NPortS(s, net.grid, z_ref)


def cascade_s(*nets: NPortS) -> NPortS:
    """Chain 2-ports left to right in the S domain (star product).

    Stays well conditioned for very lossy chains where the equivalent
    ABCD product grows like 1/|S21| and loses reciprocity to rounding.
    """
    if not nets:
        raise InvalidArgument("cascade_s needs at least one network")
    _check_grids(*(n.grid for n in nets))
    if any(n.nports != 2 for n in nets) or len({n.z_ref for n in nets}) != 1:
        raise InvalidArgument("cascade_s needs 2-ports with a common reference impedance")
    s = nets[0].s
    for other in nets[1:]:
        t = other.s
        den = 1.0 - s[:, 1, 1] * t[:, 0, 0]
        if np.any(np.abs(den) < 1e-300):
            raise NumericalDegeneracy("S-domain cascade hit a lossless resonance")
        out = np.empty_like(s)
        out[:, 0, 0] = s[:, 0, 0] + s[:, 0, 1] * s[:, 1, 0] * t[:, 0, 0] / den
        out[:, 0, 1] = s[:, 0, 1] * t[:, 0, 1] / den
        out[:, 1, 0] = t[:, 1, 0] * s[:, 1, 0] / den
        out[:, 1, 1] = t[:, 1, 1] + t[:, 1, 0] * t[:, 0, 1] * s[:, 1, 1] / den
        s = out
    return NPortS(s, nets[0].grid, nets[0].z_ref)


def s_to_abcd(net: NPortS) -> TwoPortABCD:
    if net.nports != 2:
        raise InvalidArgument("s_to_abcd needs a 2-port")
    z = net.z_ref
    s11, s12, s21, s22 = net.s[:, 0, 0], net.s[:, 0, 1], net.s[:, 1, 0], net.s[:, 1, 1]
    if np.any(np.abs(s21) < 1e-300):
        raise NumericalDegeneracy("S21 vanishes; ABCD undefined")
    den = 2.0 * s21
    m = np.empty_like(net.s)
    m[:, 0, 0] = ((1 + s11) * (1 - s22) + s12 * s21) / den
    m[:, 0, 1] = z * ((1 + s11) * (1 + s22) - s12 * s21) / den
    m[:, 1, 0] = ((1 - s11) * (1 - s22) - s12 * s21) / (z * den)
    m[:, 1, 1] = ((1 - s11) * (1 + s22) + s12 * s21) / den
    return TwoPortABCD(m, net.grid)


def coupled4_from_modes(even: TwoPortABCD, odd: TwoPortABCD, z_ref: float = DEFAULT_Z0) -> NPortS:
    """Symmetric coupled pair as a 4-port from its even- and odd-mode 2-ports.

    Port order is (line1 end1, line1 end2, line2 end1, line2 end2).
    Like-line entries are ``(Se + So)/2`` and cross-line entries ``(Se - So)/2``.
    """
    _check_grids(even.grid, odd.grid)
    se = abcd_to_s(even, z_ref).s
    so = abcd_to_s(odd, z_ref).s
    like = 0.5 * (se + so)
    cross = 0.5 * (se - so)
    s = np.empty((even.grid.n, 4, 4), dtype=complex)
    s[:, :2, :2] = like
    s[:, 2:, 2:] = like
    s[:, :2, 2:] = cross
    s[:, 2:, :2] = cross
    return NPortS(s, even.grid, z_ref)


def differential_from_legs(leg_a: NPortS, leg_b: NPortS) -> NPortS:
    """Differential-mode 2-port of two uncoupled single-ended legs."""
    _check_grids(leg_a.grid, leg_b.grid)
    if leg_a.nports != leg_b.nports:
        raise InvalidArgument("legs have different port counts")
    if leg_a.z_ref != leg_b.z_ref:
        raise InvalidArgument("legs have different reference impedances")
    return NPortS(0.5 * (leg_a.s + leg_b.s), leg_a.grid, leg_a.z_ref)


def db(x) -> np.ndarray:
    """20*log10 magnitude, floored at -400 dB to avoid -inf."""
    return 20.0 * np.log10(np.maximum(np.abs(x), 1e-20))
