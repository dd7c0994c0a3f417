"""Foundational stripline and via models.

Every element is described purely electrically: the stripline by its
length in UI, impedance and dB losses at the Nyquist frequency ``f1``; the
lumped vias by the reflected voltage they produce at ``f1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .errors import InvalidArgument
from .netcore import (
    DEFAULT_Z0,
    FrequencyGrid,
    NPortS,
    TwoPortABCD,
    cascade,
    coupled4_from_modes,
    line_abcd,
    s_to_abcd,
    series_impedance_abcd,
    shunt_admittance_abcd,
)

NEPER_DB = 20.0 / math.log(10.0)  # 8.685889638...
C0 = 299_792_458.0


@dataclass(frozen=True)
class StriplineSpec:
    f1: float
    len_ui: float
    skew_ui: float = 0.0
    z_ohf: float = 50.0
    db_rdc: float = 0.0
    db_rac: float = 0.0
    db_gac: float = 0.0
    causal_dielectric: bool = True

    def __post_init__(self):
        if not self.f1 > 0:
            raise InvalidArgument("stripline f1 must be positive")
        if not self.len_ui > 0:
            raise InvalidArgument("stripline len_ui must be positive")
        if not self.z_ohf > 0:
            raise InvalidArgument("stripline z_ohf must be positive")
        for name in ("db_rdc", "db_rac", "db_gac"):
            if getattr(self, name) < 0:
                raise InvalidArgument(f"stripline {name} must be >= 0")
        if abs(self.skew_ui) >= self.len_ui:
            raise InvalidArgument("|skew_ui| must be smaller than len_ui")

    @property
    def ui(self) -> float:
        return 0.5 / self.f1

    @property
    def delay(self) -> float:
        return self.len_ui * self.ui


@dataclass(frozen=True)
class RlcgTotals:
    """Whole-line R, L, C, G (not per unit length) at ``evaluated_at``."""

    r: np.ndarray | float
    l: np.ndarray | float
    c: np.ndarray | float
    g: np.ndarray | float
    evaluated_at: np.ndarray | float


def dielectric_exponent(spec: StriplineSpec) -> float:
    """Power-law exponent of the causal dielectric admittance.

    ``Y(w) = j w C (j w / w1)^-m / cos(m pi/2)`` has a frequency-independent
    loss tangent ``tan(m pi/2)`` and matches ``G + j w C`` exactly at ``f1``.
    """
    if spec.db_gac == 0.0:
        return 0.0
    tan_d = 2.0 * spec.db_gac / NEPER_DB / (2.0 * math.pi * spec.f1 * spec.delay)
    return 2.0 / math.pi * math.atan(tan_d)


def stripline_rlcg(spec: StriplineSpec, f, length_scale: float = 1.0) -> RlcgTotals:
    """Synthesize RLCG totals that realize the requested dB losses.

    Skin-effect loss grows as sqrt(f) with a matching internal inductance
    (``w * l_int = R_ac``).  Dielectric loss is linear in f at constant C, or,
    with ``causal_dielectric``, the constant-loss-tangent power law whose C
    rises slowly toward low frequency.  Both agree exactly at ``f1``.

    ``length_scale`` stretches one leg of a skewed pair; all totals scale with it.
    """
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise InvalidArgument("stripline_rlcg needs f > 0")
    t0 = spec.delay
    z = spec.z_ohf
    c = t0 / z
    l_ext = t0 * z
    skin_db = spec.db_rac * np.sqrt(f / spec.f1)
    r = 2.0 * z * (spec.db_rdc + skin_db) / NEPER_DB
    l_int = (2.0 * z * skin_db / NEPER_DB) / (2.0 * np.pi * f)
    if spec.causal_dielectric:
        m = dielectric_exponent(spec)
        c_f = c * (f / spec.f1) ** (-m)
        g = 2.0 * np.pi * f * c_f * math.tan(m * math.pi / 2.0)
    else:
        c_f = c + 0.0 * f
        g = 2.0 * (spec.db_gac * f / spec.f1) / (z * NEPER_DB)
    s = length_scale
    if f.ndim == 0:
        return RlcgTotals(s * float(r), s * float(l_ext + l_int), s * float(c_f), s * float(g), float(f))
    return RlcgTotals(r=s * r, l=s * (l_ext + l_int), c=s * c_f, g=s * g, evaluated_at=f)


def leg_length_scale(spec: StriplineSpec, leg: str) -> float:
    if leg not in ("A", "B"):
        raise InvalidArgument(f"leg must be 'A' or 'B', got {leg!r}")
    sign = -1.0 if leg == "A" else 1.0
    return (spec.len_ui + sign * 0.5 * spec.skew_ui) / spec.len_ui


def _series_shunt(spec: StriplineSpec, f, length_scale: float = 1.0):
    rl = stripline_rlcg(spec, f, length_scale)
    w = 2.0 * np.pi * np.asarray(f, dtype=float)
    return rl.r + 1j * w * rl.l, rl.g + 1j * w * rl.c


def stripline_abcd(spec: StriplineSpec, grid: FrequencyGrid, leg: str = "A") -> TwoPortABCD:
    zs, yp = _series_shunt(spec, grid.f, leg_length_scale(spec, leg))
    gamma_l = np.sqrt(zs * yp)  # principal branch: Re >= 0
    return line_abcd(gamma_l, zs / gamma_l, grid)


def stripline_zc(spec: StriplineSpec, f) -> np.ndarray:
    zs, yp = _series_shunt(spec, f)
    return zs / np.sqrt(zs * yp)


def stripline_gamma(spec: StriplineSpec, f) -> np.ndarray:
    """Total propagation ``gamma * length`` of the nominal (unskewed) line."""
    zs, yp = _series_shunt(spec, f)
    return np.sqrt(zs * yp)


def _rv_ratio(rv_db: float) -> float:
    if not rv_db < 0:
        raise InvalidArgument(f"rv_db must be negative, got {rv_db!r}")
    return 10.0 ** (rv_db / 20.0)


def cap_from_rv(rv_db: float, f1: float, z0: float = DEFAULT_Z0) -> float:
    """Shunt capacitance whose |S11| at ``f1`` equals ``rv_db``."""
    r = _rv_ratio(rv_db)
    return 2.0 * r / (2.0 * math.pi * f1 * z0 * math.sqrt(1.0 - r * r))


def ind_from_rv(rv_db: float, f1: float, z0: float = DEFAULT_Z0) -> float:
    """Series inductance whose |S11| at ``f1`` equals ``rv_db``."""
    r = _rv_ratio(rv_db)
    return 2.0 * z0 * r / (2.0 * math.pi * f1 * math.sqrt(1.0 - r * r))


Flavor = Literal["capacitive", "inductive"]


@dataclass(frozen=True)
class LumpedViaSpec:
    f1: float
    rv_db: float
    flavor: Flavor = "capacitive"
    xtalk_db: Optional[float] = None

    def __post_init__(self):
        if not self.f1 > 0:
            raise InvalidArgument("via f1 must be positive")
        if not self.rv_db < 0:
            raise InvalidArgument("rv_db must be negative")
        if self.flavor not in ("capacitive", "inductive"):
            raise InvalidArgument(f"unknown via flavor {self.flavor!r}")
        if self.xtalk_db is not None and not self.xtalk_db < self.rv_db:
            raise InvalidArgument("xtalk_db must be below rv_db")

    @property
    def coupled(self) -> bool:
        return self.xtalk_db is not None


@dataclass(frozen=True)
class TlineViaSpec:
    barrel_len: float
    stub_len: float
    z_leg: float = 50.0
    er: float = 3.5
    k_xtalk: float = 0.01

    def __post_init__(self):
        if not self.barrel_len > 0:
            raise InvalidArgument("barrel_len must be positive")
        if not self.stub_len >= 0:
            raise InvalidArgument("stub_len must be >= 0")
        if not self.z_leg > 0:
            raise InvalidArgument("z_leg must be positive")
        if not self.er >= 1:
            raise InvalidArgument("er must be >= 1")
        if not 0 < self.k_xtalk < 1:
            raise InvalidArgument("k_xtalk must lie in (0, 1)")

    @property
    def velocity(self) -> float:
        return C0 / math.sqrt(self.er)

    @property
    def modal_impedances(self) -> tuple[float, float]:
        k = self.k_xtalk
        ratio = math.sqrt((1 + k) / (1 - k))
        return self.z_leg * ratio, self.z_leg / ratio

    @property
    def coupled(self) -> bool:
        return True


@dataclass(frozen=True)
class TerminalCap:
    """IC pad capacitance at the TX or RX end of a channel (farads)."""

    c: float

    def __post_init__(self):
        if not self.c >= 0:
            raise InvalidArgument("terminal capacitance must be >= 0")


def lumped_via_pairleg(spec: LumpedViaSpec, grid: FrequencyGrid, z0: float = DEFAULT_Z0) -> TwoPortABCD:
    """One leg of an uncoupled lumped via pair."""
    w = grid.omega
    if spec.flavor == "capacitive":
        return shunt_admittance_abcd(1j * w * cap_from_rv(spec.rv_db, spec.f1, z0), grid)
    return series_impedance_abcd(1j * w * ind_from_rv(spec.rv_db, spec.f1, z0), grid)


def coupling_cap(xtalk_db: float, f1: float, z0: float = DEFAULT_Z0) -> float:
    x = 10.0 ** (xtalk_db / 20.0)
    return 2.0 * x / (2.0 * math.pi * f1 * z0)


def coupling_mutual(xtalk_db: float, f1: float, z0: float = DEFAULT_Z0) -> float:
    x = 10.0 ** (xtalk_db / 20.0)
    return 2.0 * z0 * x / (2.0 * math.pi * f1)


def coupled_lumped_via_4port(spec: LumpedViaSpec, grid: FrequencyGrid, z0: float = DEFAULT_Z0) -> NPortS:
    """Victim/aggressor lumped via legs with capacitive or mutual-inductive coupling.

    Ports: victim-in, victim-out, aggressor-in, aggressor-out.
    """
    if spec.xtalk_db is None:
        raise InvalidArgument("coupled via needs xtalk_db")
    w = grid.omega
    if spec.flavor == "capacitive":
        c = cap_from_rv(spec.rv_db, spec.f1, z0)
        cc = coupling_cap(spec.xtalk_db, spec.f1, z0)
        even = shunt_admittance_abcd(1j * w * c, grid)
        odd = shunt_admittance_abcd(1j * w * (c + 2.0 * cc), grid)
    else:
        ind = ind_from_rv(spec.rv_db, spec.f1, z0)
        m = coupling_mutual(spec.xtalk_db, spec.f1, z0)
        # dot convention: aggressor current induces an opposing victim EMF,
        # giving negative NEXT and positive FEXT
        even = series_impedance_abcd(1j * w * (ind - m), grid)
        odd = series_impedance_abcd(1j * w * (ind + m), grid)
    return coupled4_from_modes(even, odd, z0)


def _open_stub_admittance(zm: float, tau: float, grid: FrequencyGrid) -> np.ndarray:
    theta = grid.omega * tau
    return 1j * np.tan(theta) / zm


def tline_via_4port(spec: TlineViaSpec, grid: FrequencyGrid, z0: float = DEFAULT_Z0) -> NPortS:
    """Coupled barrel + open stub via for one (true or complement) leg system.

    Ports: victim-top, victim-stripline, aggressor-top, aggressor-stripline.
    """
    ze, zo = spec.modal_impedances
    tau_barrel = spec.barrel_len / spec.velocity
    tau_stub = spec.stub_len / spec.velocity
    modes = []
    for zm in (ze, zo):
        barrel = line_abcd(1j * grid.omega * tau_barrel, zm, grid)
        if tau_stub > 0:
            stub = shunt_admittance_abcd(_open_stub_admittance(zm, tau_stub, grid), grid)
            modes.append(cascade(barrel, stub))
        else:
            modes.append(barrel)
    return coupled4_from_modes(modes[0], modes[1], z0)


def victim_path(net4: NPortS) -> TwoPortABCD:
    """Victim thru 2-port of a coupled 4-port with matched aggressor ports."""
    sub = NPortS(net4.s[:, :2, :2].copy(), net4.grid, net4.z_ref)
    return s_to_abcd(sub)


def element_leg_abcd(elem, grid: FrequencyGrid, leg: str, z0: float = DEFAULT_Z0) -> TwoPortABCD:
    """Per-leg ABCD of any channel element (victim path for coupled ones)."""
    if isinstance(elem, StriplineSpec):
        return stripline_abcd(elem, grid, leg)
    if isinstance(elem, LumpedViaSpec):
        if elem.coupled:
            return victim_path(coupled_lumped_via_4port(elem, grid, z0))
        return lumped_via_pairleg(elem, grid, z0)
    if isinstance(elem, TlineViaSpec):
        return victim_path(tline_via_4port(elem, grid, z0))
    if isinstance(elem, TerminalCap):
        return shunt_admittance_abcd(1j * grid.omega * elem.c, grid)
    raise InvalidArgument(f"unknown channel element {elem!r}")
