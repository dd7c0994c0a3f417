"""Run configuration files (YAML or JSON).

Unknown keys and rule violations raise :class:`ConfigError` with the
1-based source line.  Element ``f1`` values are never user-supplied; they
follow from the data rate.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Optional

import yaml

from .channel import ChannelTopology
from .elements import LumpedViaSpec, StriplineSpec, TerminalCap, TlineViaSpec
from .errors import ConfigError, InvalidArgument
from .link import DEFAULT_LOSS_MAX_DB, MAX_TAPS, ChannelTemplate, MaskSpec

ELEMENT_KEYS = {
    "stripline": {"len_ui", "skew_ui", "z_ohf", "db_rdc", "db_rac", "db_gac", "causal_dielectric"},
    "via_cap": {"rv_db", "xtalk_db"},
    "via_ind": {"rv_db", "xtalk_db"},
    "via_tline": {"barrel_len_mm", "stub_len_mm", "z_diff_ohms", "er", "k_xtalk"},
    "term_cap": {"c_pf"},
}
TEMPLATE_KEYS = {
    "total_len_ui", "via_positions_ui", "n_vias", "loss_split", "db_rdc", "skew_ui",
    "z_ohf", "via_flavor", "term_cap_pf", "rv_db", "total_loss_db",
}
TOP_KEYS = {
    "data_rate_gbps", "samples_per_ui", "time_window_ui", "z0_ohms", "aggressor_route",
    "channel", "template", "rx", "mask", "sweep",
}
SWEEP_KEYS = {"rv_min_db", "rv_max_db", "rv_step_db", "loss_max_db"}


@dataclass(frozen=True)
class SweepConfig:
    rv_min_db: float = -20.0
    rv_max_db: float = -2.0
    rv_step_db: float = 1.0
    loss_max_db: float = DEFAULT_LOSS_MAX_DB

    def rv_grid(self) -> tuple:
        n = int(round((self.rv_max_db - self.rv_min_db) / self.rv_step_db))
        return tuple(round(self.rv_min_db + i * self.rv_step_db, 9) for i in range(n + 1))


@dataclass(frozen=True)
class RunConfig:
    data_rate_gbps: float = 10.0
    samples_per_ui: int = 32
    time_window_ui: int = 128
    z0_ohms: float = 50.0
    aggressor_route: str = "none"
    channel: Optional[tuple] = None  # tuple of element dicts; None -> template topology
    template: dict = field(default_factory=dict)
    dfe_taps: tuple = (0, 3, 12)
    min_eye_mv: float = 40.0
    sweep: SweepConfig = SweepConfig()

    @property
    def data_rate(self) -> float:
        return self.data_rate_gbps * 1e9

    def with_rate(self, gbps: Optional[float]) -> "RunConfig":
        return self if gbps is None else replace(self, data_rate_gbps=float(gbps))

    def mask(self) -> MaskSpec:
        return MaskSpec(self.min_eye_mv * 1e-3)

    def channel_template(self) -> ChannelTemplate:
        t = self.template
        kw = {k: t[k] for k in ("total_len_ui", "n_vias", "loss_split", "db_rdc", "skew_ui", "z_ohf", "via_flavor")
              if k in t}
        if "via_positions_ui" in t:
            kw["via_positions_ui"] = tuple(t["via_positions_ui"])
            kw.setdefault("n_vias", len(kw["via_positions_ui"]))
        return ChannelTemplate(
            data_rate=self.data_rate,
            z0=self.z0_ohms,
            term_cap=t.get("term_cap_pf", 0.0) * 1e-12,
            samples_per_ui=self.samples_per_ui,
            time_window_ui=self.time_window_ui,
            **kw,
        )

    def topology(self) -> ChannelTopology:
        if self.channel is None:
            tpl = self.channel_template()
            base = tpl.topology(self.template.get("rv_db", -12.0), self.template.get("total_loss_db", 10.0))
            return replace(base, aggressor_route=self.aggressor_route)
        f1 = self.data_rate / 2.0
        elems = [_build_element(e, f1, self.z0_ohms) for e in self.channel]
        return ChannelTopology(self.data_rate, tuple(elems), self.z0_ohms, self.aggressor_route)

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()


def _build_element(e: dict, f1: float, z0: float):
    kind = e["type"]
    if kind == "stripline":
        kw = {k: v for k, v in e.items() if k != "type"}
        return StriplineSpec(f1=f1, **kw)
    if kind in ("via_cap", "via_ind"):
        return LumpedViaSpec(
            f1=f1, rv_db=e["rv_db"], flavor="capacitive" if kind == "via_cap" else "inductive",
            xtalk_db=e.get("xtalk_db"),
        )
    if kind == "via_tline":
        return TlineViaSpec(
            barrel_len=e["barrel_len_mm"] * 1e-3, stub_len=e.get("stub_len_mm", 0.0) * 1e-3,
            z_leg=e.get("z_diff_ohms", 2 * z0) / 2.0, er=e.get("er", 3.5), k_xtalk=e.get("k_xtalk", 0.01),
        )
    return TerminalCap(e["c_pf"] * 1e-12)


def _line(node) -> int:
    return node.start_mark.line + 1


def _plain(node) -> Any:
    return yaml.constructor.SafeConstructor().construct_object(node, deep=True)


def _mapping(node, allowed: set, where: str) -> dict:
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError(f"line {_line(node)}: {where} must be a mapping")
    out = {}
    for k, v in node.value:
        if k.value not in allowed:
            raise ConfigError(f"line {_line(k)}: unknown key {k.value!r} in {where}")
        if k.value in out:
            raise ConfigError(f"line {_line(k)}: duplicate key {k.value!r} in {where}")
        out[k.value] = v
    return out


def _number(node, where: str, integer: bool = False):
    val = _plain(node)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"line {_line(node)}: {where} must be a number")
    if integer and int(val) != val:
        raise ConfigError(f"line {_line(node)}: {where} must be an integer")
    return int(val) if integer else float(val)


def _element(node, index: int) -> dict:
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError(f"line {_line(node)}: channel[{index}] must be a mapping")
    raw = {k.value: (k, v) for k, v in node.value}
    if "type" not in raw:
        raise ConfigError(f"line {_line(node)}: channel[{index}] needs a type")
    kind = _plain(raw["type"][1])
    if kind not in ELEMENT_KEYS:
        raise ConfigError(f"line {_line(raw['type'][1])}: unknown element type {kind!r}")
    fields = _mapping(node, ELEMENT_KEYS[kind] | {"type"}, f"{kind} element")
    out: dict = {"type": kind}
    for k, v in fields.items():
        if k == "type":
            continue
        if k == "causal_dielectric":
            val = _plain(v)
            if not isinstance(val, bool):
                raise ConfigError(f"line {_line(v)}: causal_dielectric must be true or false")
            out[k] = val
        else:
            out[k] = _number(v, k)
    if kind in ("via_cap", "via_ind"):
        if "rv_db" not in out:
            raise ConfigError(f"line {_line(node)}: {kind} needs rv_db")
        if not out["rv_db"] < 0:
            raise ConfigError(f"line {_line(fields['rv_db'])}: rv_db must be negative")
    if kind == "stripline" and "len_ui" not in out:
        raise ConfigError(f"line {_line(node)}: stripline needs len_ui")
    if kind == "via_tline" and "barrel_len_mm" not in out:
        raise ConfigError(f"line {_line(node)}: via_tline needs barrel_len_mm")
    if kind == "term_cap" and "c_pf" not in out:
        raise ConfigError(f"line {_line(node)}: term_cap needs c_pf")
    return out


def _parse_taps(node) -> tuple:
    val = _plain(node)
    vals = val if isinstance(val, list) else [val]
    taps = []
    for v in vals:
        if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v <= MAX_TAPS:
            raise ConfigError(f"line {_line(node)}: dfe_taps must be integers in [0, {MAX_TAPS}]")
        taps.append(v)
    if not taps:
        raise ConfigError(f"line {_line(node)}: dfe_taps is empty")
    return tuple(sorted(set(taps)))


def load_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse YAML or JSON text into a validated :class:`RunConfig`."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}: " if mark is not None else ""
        raise ConfigError(f"{source}: {where}malformed config ({getattr(exc, 'problem', exc)})") from None
    if root is None:
        return _validate(RunConfig(), source)
    try:
        top = _mapping(root, TOP_KEYS, "config")
        kw: dict = {}
        for key in ("data_rate_gbps", "z0_ohms"):
            if key in top:
                kw[key] = _number(top[key], key)
        for key in ("samples_per_ui", "time_window_ui"):
            if key in top:
                kw[key] = _number(top[key], key, integer=True)
        if "aggressor_route" in top:
            kw["aggressor_route"] = str(_plain(top["aggressor_route"]))
        if "channel" in top:
            seq = top["channel"]
            if not isinstance(seq, yaml.SequenceNode):
                raise ConfigError(f"line {_line(seq)}: channel must be a list of elements")
            kw["channel"] = tuple(_element(n, i) for i, n in enumerate(seq.value))
        if "template" in top:
            tmap = _mapping(top["template"], TEMPLATE_KEYS, "template")
            tpl: dict = {}
            for k, v in tmap.items():
                if k == "via_flavor":
                    tpl[k] = str(_plain(v))
                elif k == "via_positions_ui":
                    if not isinstance(v, yaml.SequenceNode):
                        raise ConfigError(f"line {_line(v)}: via_positions_ui must be a list")
                    tpl[k] = [_number(n, k) for n in v.value]
                elif k == "n_vias":
                    tpl[k] = _number(v, k, integer=True)
                else:
                    tpl[k] = _number(v, k)
            if "rv_db" in tpl and not tpl["rv_db"] < 0:
                raise ConfigError(f"line {_line(tmap['rv_db'])}: rv_db must be negative")
            kw["template"] = tpl
        if "rx" in top:
            rx = _mapping(top["rx"], {"dfe_taps"}, "rx")
            if "dfe_taps" in rx:
                kw["dfe_taps"] = _parse_taps(rx["dfe_taps"])
        if "mask" in top:
            mk = _mapping(top["mask"], {"min_eye_mv"}, "mask")
            if "min_eye_mv" in mk:
                kw["min_eye_mv"] = _number(mk["min_eye_mv"], "min_eye_mv")
        if "sweep" in top:
            sw = _mapping(top["sweep"], SWEEP_KEYS, "sweep")
            kw["sweep"] = SweepConfig(**{k: _number(v, k) for k, v in sw.items()})
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return _validate(RunConfig(**kw), source)


def _validate(cfg: RunConfig, source: str) -> RunConfig:
    """Cross-field rules, checked by building the objects they govern."""
    try:
        if not cfg.data_rate_gbps > 0:
            raise InvalidArgument("data_rate_gbps must be positive")
        if not cfg.min_eye_mv > 0:
            raise InvalidArgument("min_eye_mv must be positive")
        sw = cfg.sweep
        if not sw.rv_step_db > 0 or not sw.rv_min_db <= sw.rv_max_db < 0:
            raise InvalidArgument("sweep needs rv_min_db <= rv_max_db < 0 and rv_step_db > 0")
        if not sw.loss_max_db > 0:
            raise InvalidArgument("loss_max_db must be positive")
        cfg.channel_template()
        cfg.topology()
    except InvalidArgument as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return cfg


def read_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return load_config(text, path)
