"""Channel assembly and scalar channel metrics (IL, RV, BRV, broadband crosstalk)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence, Union

import numpy as np

from .elements import (
    LumpedViaSpec,
    StriplineSpec,
    TerminalCap,
    TlineViaSpec,
    coupled_lumped_via_4port,
    element_leg_abcd,
    tline_via_4port,
)
from .errors import InvalidArgument, UnsupportedTopology
from .netcore import (
    DEFAULT_Z0,
    FrequencyGrid,
    NPortS,
    abcd_to_s,
    cascade_s,
    db,
    differential_from_legs,
    identity_abcd,
)

Element = Union[StriplineSpec, LumpedViaSpec, TlineViaSpec, TerminalCap]
AggressorRoute = Literal["none", "same-direction", "opposing"]

BELOW_FLOOR_DB = -80.0
DEFAULT_HULL_WINDOW = 2.0


@dataclass(frozen=True)
class ChannelTopology:
    data_rate: float
    elements: tuple = ()
    z0: float = DEFAULT_Z0
    aggressor_route: AggressorRoute = "none"

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if not self.data_rate > 0:
            raise InvalidArgument("data_rate must be positive")
        if not self.elements:
            raise InvalidArgument("a channel needs at least one element")
        if self.aggressor_route not in ("none", "same-direction", "opposing"):
            raise InvalidArgument(f"unknown aggressor_route {self.aggressor_route!r}")
        f1 = self.f1
        for i, e in enumerate(self.elements):
            if isinstance(e, TerminalCap):
                if 0 < i < len(self.elements) - 1:
                    raise InvalidArgument("TerminalCap may only be the first or last element")
            elif isinstance(e, (StriplineSpec, LumpedViaSpec)):
                if not np.isclose(e.f1, f1, rtol=1e-12, atol=0.0):
                    raise InvalidArgument(
                        f"element {i} has f1={e.f1:g} Hz but data_rate/2 is {f1:g} Hz"
                    )
            elif not isinstance(e, TlineViaSpec):
                raise InvalidArgument(f"unknown element type at position {i}: {type(e).__name__}")

    @property
    def f1(self) -> float:
        return self.data_rate / 2.0

    @property
    def ui(self) -> float:
        return 1.0 / self.data_rate


@dataclass(frozen=True)
class ChannelMetrics:
    il_at_nyquist: float
    rv_at_nyquist: float
    brv: float
    total_delay: float


def _leg_cascade(elements: Sequence[Element], grid: FrequencyGrid, leg: str, z0: float) -> NPortS:
    if not elements:
        return abcd_to_s(identity_abcd(grid), z0)
    return cascade_s(*(abcd_to_s(element_leg_abcd(e, grid, leg, z0), z0) for e in elements))


def assemble_victim(top: ChannelTopology, grid: FrequencyGrid) -> NPortS:
    """Differential thru 2-port of the victim channel (aggressor ports matched)."""
    legs = [_leg_cascade(top.elements, grid, leg, top.z0) for leg in ("A", "B")]
    return differential_from_legs(*legs)


def coupled_index(top: ChannelTopology) -> int:
    idx = [
        i for i, e in enumerate(top.elements)
        if isinstance(e, TlineViaSpec) or (isinstance(e, LumpedViaSpec) and e.coupled)
    ]
    if len(idx) != 1:
        raise UnsupportedTopology(
            f"coupled assembly needs exactly one coupled element, found {len(idx)}"
        )
    return idx[0]


def _embed_victim(core: NPortS, pre: NPortS, post: NPortS) -> NPortS:
    """Connect 2-port ``pre`` to core port 1 and ``post`` to core port 2.

    Aggressor ports (3, 4) stay exposed.  The two internal joins are
    eliminated with the standard sub-network connection formula.
    """
    n = core.grid.n
    # ports: a1 a2 | c1 c2 c3 c4 | b1 b2 ; joins a2-c1, c2-b1
    s = np.zeros((n, 8, 8), dtype=complex)
    s[:, 0:2, 0:2] = pre.s
    s[:, 2:6, 2:6] = core.s
    s[:, 6:8, 6:8] = post.s
    ext = [0, 7, 4, 5]  # victim-TX, victim-RX, aggressor-a, aggressor-b
    internal = [1, 2, 3, 6]
    join = np.zeros((4, 4), dtype=complex)
    join[0, 1] = join[1, 0] = 1.0
    join[2, 3] = join[3, 2] = 1.0
    see = s[:, ext][:, :, ext]
    sei = s[:, ext][:, :, internal]
    sie = s[:, internal][:, :, ext]
    sii = s[:, internal][:, :, internal]
    out = see + sei @ np.linalg.solve(join[None] - sii, sie)
    return NPortS(out, core.grid, core.z_ref)


def assemble_coupled(top: ChannelTopology, grid: FrequencyGrid) -> NPortS:
    """Victim channel with one coupled element; aggressor ports exposed.

    Ports: victim-TX, victim-RX, aggressor-a, aggressor-b where aggressor-a
    sits on the victim-TX side of the coupled element.  Routing is recorded
    on the topology; use :func:`crosstalk_trace` to pick NEXT/FEXT.
    """
    if top.aggressor_route == "none":
        raise UnsupportedTopology("assemble_coupled needs an aggressor route")
    i = coupled_index(top)
    elem = top.elements[i]
    core = (
        tline_via_4port(elem, grid, top.z0)
        if isinstance(elem, TlineViaSpec)
        else coupled_lumped_via_4port(elem, grid, top.z0)
    )
    # coupled elements are leg-symmetric; leg A carries the victim path
    pre = _leg_cascade(top.elements[:i], grid, "A", top.z0)
    post = _leg_cascade(top.elements[i + 1:], grid, "A", top.z0)
    return _embed_victim(core, pre, post)


def crosstalk_trace(coupled: NPortS, route: AggressorRoute) -> np.ndarray:
    """Victim-RX crosstalk transfer for the given aggressor routing.

    Opposing aggressors flow RX->TX so they launch at aggressor-b (RX side)
    and appear as NEXT; same-direction aggressors launch at aggressor-a.
    """
    if route == "opposing":
        return coupled.s[:, 1, 3]
    if route == "same-direction":
        return coupled.s[:, 1, 2]
    raise UnsupportedTopology("no aggressor route")


def _local_maxima(y: np.ndarray) -> np.ndarray:
    inner = (y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:])
    return np.nonzero(inner)[0] + 1


def _upper_hull(x: np.ndarray, y: np.ndarray) -> list[int]:
    hull: list[int] = []
    for i in range(len(x)):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            cross = (x[i1] - x[i0]) * (y[i] - y[i0]) - (y[i1] - y[i0]) * (x[i] - x[i0])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def hull_points(trace_db, grid: FrequencyGrid, f1: float,
                window: float = DEFAULT_HULL_WINDOW) -> tuple[np.ndarray, np.ndarray]:
    """Frequencies and dB values of the hull vertices used by :func:`hump_line`."""
    y = np.asarray(trace_db, dtype=float)
    if y.shape != (grid.n,):
        raise InvalidArgument("trace does not match the grid")
    if grid.f_max < window * f1 or f1 <= grid.f[0]:
        raise InvalidArgument("grid does not span (0, window*f1]")
    peaks = _local_maxima(y[: grid.index_of(window * f1) + 1])
    if len(peaks) < 2:
        return grid.f[peaks], y[peaks]
    fx, fy = grid.f[peaks], y[peaks]
    hull = _upper_hull(fx, fy)
    return fx[hull], fy[hull]


def hump_line(trace_db, grid: FrequencyGrid, f1: float, window: float = DEFAULT_HULL_WINDOW) -> float:
    """Straight-line-over-humps value of a dB trace at ``f1``.

    Local maxima below ``window * f1`` are joined by their upper convex hull,
    which is read at ``f1`` (extended linearly past the outermost maxima).  A
    single hump acts as a flat line.  The result never falls below the trace
    itself at ``f1``.  Traces under :data:`BELOW_FLOOR_DB` return that floor.
    """
    hx, hy = hull_points(trace_db, grid, f1, window)
    at_f1 = float(np.asarray(trace_db, dtype=float)[grid.index_of(f1)])
    if len(hx) == 0:
        value = at_f1
    elif len(hx) == 1:
        value = hy[0]
    else:
        j = int(np.clip(np.searchsorted(hx, f1) - 1, 0, len(hx) - 2))
        slope = (hy[j + 1] - hy[j]) / (hx[j + 1] - hx[j])
        value = hy[j] + slope * (f1 - hx[j])
    return float(max(value, at_f1, BELOW_FLOOR_DB))


def brv(trace_db, grid: FrequencyGrid, f1: float, window: float = DEFAULT_HULL_WINDOW) -> float:
    """Broadband reflected voltage of an |S11| dB trace."""
    return hump_line(trace_db, grid, f1, window)


def broadband_xtalk(trace_db, grid: FrequencyGrid, f1: float, window: float = DEFAULT_HULL_WINDOW) -> float:
    """Broadband crosstalk of an |Sxy| dB trace; same construction as :func:`brv`."""
    return hump_line(trace_db, grid, f1, window)


def total_delay(top: ChannelTopology) -> float:
    d = 0.0
    for e in top.elements:
        if isinstance(e, StriplineSpec):
            d += e.delay
        elif isinstance(e, TlineViaSpec):
            d += e.barrel_len / e.velocity
    return d


def metrics(top: ChannelTopology, grid: FrequencyGrid, window: float = DEFAULT_HULL_WINDOW) -> ChannelMetrics:
    net = assemble_victim(top, grid)
    k = grid.index_of(top.f1)
    s11_db = db(net.param(1, 1))
    return ChannelMetrics(
        il_at_nyquist=float(db(net.param(2, 1))[k]),
        rv_at_nyquist=float(max(s11_db[k], BELOW_FLOOR_DB)),
        brv=brv(s11_db, grid, top.f1, window),
        total_delay=total_delay(top),
    )
