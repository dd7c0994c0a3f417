"""Deterministic SVG plots.

Figures are rendered with matplotlib's SVG backend using a fixed
hash salt and no timestamp, so identical inputs give byte-identical files.
The run's config digest is embedded as an XML comment.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Literal, Sequence

import matplotlib

matplotlib.use("svg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import InvalidArgument  # noqa: E402

PlotKind = Literal["curve", "spectrum", "timeseries"]
_RC = {
    "svg.hashsalt": "linkcurves",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "axes.grid": True,
    "grid.alpha": 0.3,
    "path.simplify": False,
}


@dataclass(frozen=True)
class Series:
    label: str
    x: Sequence[float]
    y: Sequence[float]
    style: str = "-"


@dataclass(frozen=True)
class PlotSpec:
    kind: PlotKind
    series: tuple
    xlabel: str
    ylabel: str
    title: str = ""
    hlines: tuple = field(default_factory=tuple)  # ((y, label), ...)

    def __post_init__(self):
        if self.kind not in ("curve", "spectrum", "timeseries"):
            raise InvalidArgument(f"unknown plot kind {self.kind!r}")
        if not self.series:
            raise InvalidArgument("a plot needs at least one series")
        for s in self.series:
            if len(s.x) != len(s.y):
                raise InvalidArgument(f"series {s.label!r} has mismatched x/y lengths")


def render_svg(spec: PlotSpec, digest: str = "") -> str:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(7.0, 4.5))
        for s in spec.series:
            x = np.asarray(s.x, dtype=float)
            y = np.asarray(s.y, dtype=float)
            y = np.where(np.isfinite(y), y, np.nan)  # below-range points leave gaps
            ax.plot(x, y, s.style, label=s.label, linewidth=1.4, markersize=3.5)
        for yv, label in spec.hlines:
            ax.axhline(yv, color="0.3", linestyle="--", linewidth=1.0, label=label)
        ax.set_xlabel(spec.xlabel)
        ax.set_ylabel(spec.ylabel)
        if spec.title:
            ax.set_title(spec.title)
        if len(spec.series) > 1 or spec.hlines:
            ax.legend(fontsize=8)
        fig.tight_layout()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    text = buf.getvalue()
    comment = f"<!-- config-digest: {digest} -->\n" if digest else ""
    head, sep, rest = text.partition("?>\n")
    if not sep:
        return comment + text
    return head + sep + comment + rest


def write_svg(spec: PlotSpec, path, digest: str = "") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_svg(spec, digest))
