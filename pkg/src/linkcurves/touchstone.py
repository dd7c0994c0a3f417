"""Touchstone v1 reader and writer (.s1p, .s2p, .s4p, .s8p).

Files are written as ``# Hz S RI R <z>`` with 17 significant digits so a
write/read cycle reproduces every value to within floating-point rounding.
"""
from __future__ import annotations

import io
import os
from typing import TextIO, Union

import numpy as np

from .errors import InvalidArgument, TouchstoneParseError, UnsupportedFormat
from .netcore import FrequencyGrid, NPortS

SUPPORTED_PORTS = (1, 2, 4, 8)
_UNITS = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}
_FORMATS = ("RI", "MA", "DB")

PathOrFile = Union[str, os.PathLike, TextIO]


def _ordered_pairs(s: np.ndarray) -> list[tuple[int, int]]:
    """Column order of one frequency's entries.

    Touchstone v1 lists 2-ports column-major (S11 S21 S12 S22) and larger
    networks row-major.
    """
    p = s.shape[-1]
    if p == 2:
        return [(0, 0), (1, 0), (0, 1), (1, 1)]
    return [(i, j) for i in range(p) for j in range(p)]


def _format_value(v: float) -> str:
    return f"{v:.16e}"


def touchstone_write(net: NPortS, destination: PathOrFile) -> None:
    p = net.nports
    if p not in SUPPORTED_PORTS:
        raise InvalidArgument(f"Touchstone export supports {SUPPORTED_PORTS} ports, got {p}")
    lines = [
        f"! {p}-port S-parameters, {net.grid.n} points",
        f"# Hz S RI R {_format_value(net.z_ref)}",
    ]
    pairs = _ordered_pairs(net.s[0])
    pad = " " * len(_format_value(1.0))
    for k, f in enumerate(net.grid.f):
        vals = [net.s[k, i, j] for i, j in pairs]
        # v1 allows at most four complex pairs per line
        for n in range(0, len(vals), 4):
            head = _format_value(f) if n == 0 else pad
            body = " ".join(f"{_format_value(v.real)} {_format_value(v.imag)}" for v in vals[n:n + 4])
            lines.append(f"{head} {body}")
    text = "\n".join(lines) + "\n"
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)


def _nports_from_name(name: str) -> int | None:
    ext = os.path.splitext(name)[1].lower()
    if len(ext) >= 4 and ext.startswith(".s") and ext.endswith("p") and ext[2:-1].isdigit():
        return int(ext[2:-1])
    return None


def _parse_option_line(text: str, lineno: int) -> tuple[float, str, float]:
    tokens = text[1:].split()
    unit, fmt, z = 1e9, "MA", 50.0  # v1 defaults
    i = 0
    while i < len(tokens):
        t = tokens[i].upper()
        if t in _UNITS:
            unit = _UNITS[t]
        elif t in _FORMATS:
            fmt = t
        elif t == "S":
            pass
        elif t in ("Y", "Z", "H", "G"):
            raise UnsupportedFormat(f"line {lineno}: only S-parameters are supported, got {t}")
        elif t == "R":
            if i + 1 >= len(tokens):
                raise TouchstoneParseError("reference impedance missing after R", lineno)
            try:
                z = float(tokens[i + 1])
            except ValueError:
                raise TouchstoneParseError(f"bad reference impedance {tokens[i + 1]!r}", lineno) from None
            i += 1
        else:
            raise UnsupportedFormat(f"line {lineno}: unsupported option {tokens[i]!r}")
        i += 1
    return unit, fmt, z


def _to_complex(a: np.ndarray, b: np.ndarray, fmt: str) -> np.ndarray:
    if fmt == "RI":
        return a + 1j * b
    mag = a if fmt == "MA" else 10.0 ** (a / 20.0)
    return mag * np.exp(1j * np.deg2rad(b))


def touchstone_read(source: PathOrFile, nports: int | None = None) -> NPortS:
    """Read a Touchstone v1 file into an :class:`NPortS`.

    The port count comes from the file extension or ``nports``.  The
    frequency points must be uniformly spaced with ``f[k] = (k + 1) * df``,
    which is what :func:`touchstone_write` produces; other files can be
    loaded with :func:`touchstone_read_raw` and resampled by the caller.
    """
    freqs, s, z = touchstone_read_raw(source, nports)
    n = len(freqs)
    df = freqs[0]
    expected = np.arange(1, n + 1) * df
    if not np.allclose(freqs, expected, rtol=1e-9, atol=0.0):
        raise InvalidArgument("frequency points are not on a (k+1)*df grid; use touchstone_read_raw")
    return NPortS(s, FrequencyGrid(df=float(df), n=n), z)


def touchstone_read_raw(source: PathOrFile, nports: int | None = None) -> tuple[np.ndarray, np.ndarray, float]:
    """Parse a Touchstone v1 file into ``(f_hz, s, z_ref)`` without grid checks."""
    if hasattr(source, "read"):
        text = source.read()
        name = getattr(source, "name", "")
    else:
        name = os.fspath(source)
        with open(name, encoding="ascii", errors="replace") as fh:
            text = fh.read()
    p = nports or _nports_from_name(str(name))
    if p is None:
        raise InvalidArgument("cannot infer port count; pass nports")
    if p not in SUPPORTED_PORTS:
        raise UnsupportedFormat(f"{p}-port files are not supported")
    per_point = 1 + 2 * p * p
    option = None
    numbers: list[float] = []
    starts: list[int] = []
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            raise UnsupportedFormat(f"line {lineno}: Touchstone v2 keywords are not supported")
        if line.startswith("#"):
            if option is not None:
                raise TouchstoneParseError("second option line", lineno)
            option = _parse_option_line(line, lineno)
            continue
        if option is None:
            raise TouchstoneParseError("data before the option line", lineno)
        for tok in line.split():
            try:
                numbers.append(float(tok))
            except ValueError:
                raise TouchstoneParseError(f"not a number: {tok!r}", lineno) from None
            starts.append(lineno)
    if option is None:
        raise TouchstoneParseError("missing option line", 0)
    if not numbers:
        raise TouchstoneParseError("no data", 0)
    if len(numbers) % per_point:
        raise TouchstoneParseError(
            f"data ends mid-record ({len(numbers)} values, {per_point} per point)", starts[-1]
        )
    unit, fmt, z = option
    data = np.asarray(numbers).reshape(-1, per_point)
    freqs = data[:, 0] * unit
    bad = np.nonzero(np.diff(freqs) <= 0)[0]
    if len(bad):
        raise TouchstoneParseError("frequencies must increase", starts[(bad[0] + 1) * per_point])
    vals = _to_complex(data[:, 1::2], data[:, 2::2], fmt)
    s = np.empty((len(freqs), p, p), dtype=complex)
    for col, (i, j) in enumerate(_ordered_pairs(s[0])):
        s[:, i, j] = vals[:, col]
    return freqs, s, z


def resample(freqs: np.ndarray, s: np.ndarray, grid: FrequencyGrid, z_ref: float) -> NPortS:
    """Interpolate raw S data onto ``grid`` (linear in real/imag parts).

    Points beyond the measured band hold the nearest edge value.
    """
    f = grid.f
    out = np.empty((grid.n,) + s.shape[1:], dtype=complex)
    for i in range(s.shape[1]):
        for j in range(s.shape[2]):
            out[:, i, j] = np.interp(f, freqs, s[:, i, j].real) + 1j * np.interp(f, freqs, s[:, i, j].imag)
    return NPortS(out, grid, z_ref)
