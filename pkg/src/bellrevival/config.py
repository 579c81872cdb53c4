"""Run configuration: INI file with unit-bearing values.

Sections: [physical], [bath], [initial], [sweep], [sensing], [output].
Quantities are written ``<number> <unit>``:

* frequencies: rad/s (default), Hz, kHz, MHz, GHz, or ``omega0`` (relative);
* lengths: m (default), mm, um, nm, or ``lambda0``;
* times: s (default), ms, us, ns, ``inv_omega0`` (1/omega0) or ``TP``
  (Poincare time of the discrete bath).

Lists are ``linspace(a, b, n) <unit>``, ``logspace(a, b, n) <unit>`` or a
comma list where each element carries its own unit.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import ConfigError
from .model import SPEED_OF_LIGHT, PhysicalParams

TWO_PI = 2.0 * math.pi

FREQUENCY_UNITS: Dict[str, Tuple[str, float]] = {
    "": ("rad/s", 1.0),
    "rad/s": ("rad/s", 1.0),
    "Hz": ("rad/s", TWO_PI),
    "kHz": ("rad/s", TWO_PI * 1e3),
    "MHz": ("rad/s", TWO_PI * 1e6),
    "GHz": ("rad/s", TWO_PI * 1e9),
    "omega0": ("omega0", 1.0),
}
LENGTH_UNITS: Dict[str, Tuple[str, float]] = {
    "": ("m", 1.0),
    "m": ("m", 1.0),
    "mm": ("m", 1e-3),
    "um": ("m", 1e-6),
    "nm": ("m", 1e-9),
    "lambda0": ("lambda0", 1.0),
}
TIME_UNITS: Dict[str, Tuple[str, float]] = {
    "": ("s", 1.0),
    "s": ("s", 1.0),
    "ms": ("s", 1e-3),
    "us": ("s", 1e-6),
    "ns": ("s", 1e-9),
    "inv_omega0": ("inv_omega0", 1.0),
    "TP": ("TP", 1.0),
}
UNIT_TABLES = {"frequency": FREQUENCY_UNITS, "length": LENGTH_UNITS, "time": TIME_UNITS, "number": {"": ("", 1.0)}}

COMMANDS = ("revival", "map", "lifetime", "crb")
INITIAL_STATES = ("eg", "ge", "S", "A")


@dataclass(frozen=True)
class Quantity:
    """A number in a canonical unit (SI or relative to omega0 / lambda0 / T_P)."""

    value: float
    unit: str

    def __str__(self) -> str:
        return f"{self.value!r} {self.unit}".rstrip()

    def in_si(self, omega0: float, k0: float, t_p: Optional[float] = None) -> float:
        """Resolve to rad/s, m or s."""
        if self.unit in ("rad/s", "m", "s", ""):
            return self.value
        if self.unit == "omega0":
            return self.value * omega0
        if self.unit == "lambda0":
            return self.value * TWO_PI / k0
        if self.unit == "inv_omega0":
            return self.value / omega0
        if self.unit == "TP":
            if t_p is None:
                raise ConfigError("a time in units of TP needs a discrete bath")
            return self.value * t_p
        raise ConfigError(f"unknown unit {self.unit!r}")


_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_QUANTITY_RE = re.compile(rf"^\s*({_NUMBER})\s*((?:[A-Za-z_/][A-Za-z0-9_/]*)?)\s*$")
_RANGE_RE = re.compile(rf"^\s*(linspace|logspace)\(\s*({_NUMBER})\s*,\s*({_NUMBER})\s*,\s*(\d+)\s*\)\s*((?:[A-Za-z_/][A-Za-z0-9_/]*)?)\s*$")


def parse_quantity(text: str, kind: str, where: str = "") -> Quantity:
    m = _QUANTITY_RE.match(text)
    if not m:
        raise ConfigError(f"{where}: cannot parse {text!r} as a {kind}")
    value, unit = float(m.group(1)), m.group(2)
    table = UNIT_TABLES[kind]
    if unit not in table:
        raise ConfigError(f"{where}: unit {unit!r} is not a {kind} unit (use one of {sorted(u for u in table if u)})")
    canon, scale = table[unit]
    if not math.isfinite(value):
        raise ConfigError(f"{where}: value must be finite")
    return Quantity(_scaled(value, scale), canon)


def _scaled(value: float, scale: float) -> float:
    # Divide by 1e3, 1e6, ... rather than multiply by 1e-3, ... so "100 us" is exactly 1e-4.
    if scale < 1.0:
        return value / round(1.0 / scale)
    return value * scale


@dataclass(frozen=True)
class ListSpec:
    """A list of quantities kept in the form it was written, for exact round trips."""

    mode: str  # "linspace", "logspace" or "list"
    items: Tuple[Quantity, ...] = ()
    start: float = 0.0
    stop: float = 0.0
    num: int = 0
    unit: str = ""

    def quantities(self) -> List[Quantity]:
        if self.mode == "list":
            return list(self.items)
        fn = np.linspace if self.mode == "linspace" else np.logspace
        return [Quantity(float(x), self.unit) for x in fn(self.start, self.stop, self.num)]

    def __str__(self) -> str:
        if self.mode == "list":
            return ", ".join(str(q) for q in self.items)
        return f"{self.mode}({self.start!r}, {self.stop!r}, {self.num}) {self.unit}".rstrip()


def parse_list(text: str, kind: str, where: str = "") -> ListSpec:
    m = _RANGE_RE.match(text)
    if m:
        mode, start, stop, num, unit = m.group(1), float(m.group(2)), float(m.group(3)), int(m.group(4)), m.group(5)
        table = UNIT_TABLES[kind]
        if unit not in table:
            raise ConfigError(f"{where}: unit {unit!r} is not a {kind} unit")
        canon, scale = table[unit]
        if num < 1:
            raise ConfigError(f"{where}: a range needs at least one point")
        if scale != 1.0:
            # Fold the unit scale into explicit values so the list stays canonical.
            fn = np.linspace if mode == "linspace" else np.logspace
            items = tuple(Quantity(_scaled(float(x), scale), canon) for x in fn(start, stop, num))
            return ListSpec("list", items)
        return ListSpec(mode, start=start, stop=stop, num=num, unit=canon)
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise ConfigError(f"{where}: empty list")
    return ListSpec("list", tuple(parse_quantity(p, kind, where) for p in parts))


def _parse_numbers(text: str, where: str) -> List[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ConfigError(f"{where}: expected comma-separated numbers, got {text!r}") from exc


def _parse_bool(text: str, where: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{where}: expected a boolean, got {text!r}")


def _parse_int(text: str, where: str) -> int:
    try:
        x = float(text)
    except ValueError as exc:
        raise ConfigError(f"{where}: expected an integer, got {text!r}") from exc
    if not x.is_integer():
        raise ConfigError(f"{where}: expected an integer, got {text!r}")
    return int(x)


@dataclass(frozen=True)
class PhysicalBlock:
    omega0: Quantity = Quantity(TWO_PI * 5e9, "rad/s")
    gamma: Optional[Quantity] = None
    g: Optional[Quantity] = None
    lam: Quantity = Quantity(0.001, "omega0")
    J: Quantity = Quantity(0.0, "omega0")
    d: Quantity = Quantity(0.5, "lambda0")
    v: float = SPEED_OF_LIGHT
    normalized: bool = True


@dataclass(frozen=True)
class BathBlock:
    n_modes: int = 100
    span: Optional[Quantity] = None
    edge_ratio: float = 50.0
    use_k0_phase: bool = True


@dataclass(frozen=True)
class SweepBlock:
    horizon: Optional[Quantity] = None
    samples_per_period: int = 100
    d_values: Optional[ListSpec] = None
    lambda_values: Optional[ListSpec] = None
    delta_d_fracs: Optional[ListSpec] = None
    dps: int = 50
    min_prominence: Optional[float] = None


@dataclass(frozen=True)
class SensingBlock:
    t_int: Optional[ListSpec] = None
    n_rep: Tuple[int, ...] = ()


@dataclass(frozen=True)
class RunConfig:
    physical: PhysicalBlock = field(default_factory=PhysicalBlock)
    bath: BathBlock = field(default_factory=BathBlock)
    initial: str = "eg"
    sweep: SweepBlock = field(default_factory=SweepBlock)
    sensing: SensingBlock = field(default_factory=SensingBlock)
    output: Optional[str] = None

    # -- resolution ------------------------------------------------------
    @property
    def omega0(self) -> float:
        return self.physical.omega0.value

    @property
    def k0(self) -> float:
        return self.omega0 / self.physical.v

    def _si(self, q: Quantity) -> float:
        return q.in_si(self.omega0, self.k0)

    def params(self, lam: Optional[float] = None) -> PhysicalParams:
        """SI parameters.  With ``lam`` given, g is held fixed and gamma follows."""
        p = self.physical
        base_lam = self._si(p.lam)
        if p.g is not None:
            g = self._si(p.g)
        else:
            g = math.sqrt(self._si(p.gamma) * base_lam / 2.0)
        lam = base_lam if lam is None else lam
        try:
            return PhysicalParams.from_g(self.omega0, g, lam, J=self._si(p.J), d=self._si(p.d), v=p.v)
        except ValueError as exc:
            raise ConfigError(f"physical: {exc}") from exc

    def with_defaults(self, command: str) -> "RunConfig":
        """Fill the command-specific defaults so the effective config is explicit."""
        s = self.sweep
        if command == "revival":
            s = replace(s, horizon=s.horizon or Quantity(3.5, "TP"))
        elif command == "map":
            s = replace(
                s,
                horizon=s.horizon or Quantity(400.0, "inv_omega0"),
                d_values=s.d_values or ListSpec("linspace", start=0.0, stop=0.5, num=40, unit="lambda0"),
                lambda_values=s.lambda_values or ListSpec("logspace", start=-4.0, stop=0.0, num=40, unit="omega0"),
            )
        elif command == "lifetime":
            s = replace(s, delta_d_fracs=s.delta_d_fracs or ListSpec("logspace", start=-8.0, stop=0.0, num=81))
        sens = self.sensing
        if command == "crb" and sens.t_int is None:
            sens = SensingBlock(t_int=ListSpec("list", (Quantity(1.0, "s"), Quantity(1e-4, "s"))), n_rep=(100000, 100000000))
        return replace(self, sweep=s, sensing=sens)

    def validate(self, command: Optional[str] = None) -> "RunConfig":
        p = self.physical
        if p.omega0.unit != "rad/s" or not p.omega0.value > 0:
            raise ConfigError("physical.omega0: must be a positive absolute frequency")
        if (p.gamma is None) == (p.g is None):
            raise ConfigError("physical: give exactly one of gamma or g")
        if not (math.isfinite(p.v) and p.v > 0):
            raise ConfigError("physical.v: must be positive")
        self.params()
        if self.initial not in INITIAL_STATES:
            raise ConfigError(f"initial.state: must be one of {INITIAL_STATES}")
        s = self.sweep
        if s.samples_per_period < 100:
            raise ConfigError("sweep.samples_per_period: must be at least 100")
        if s.dps < 16:
            raise ConfigError("sweep.dps: must be at least 16")
        if s.horizon is not None and not s.horizon.value > 0:
            raise ConfigError("sweep.horizon: must be positive")
        if self.bath.n_modes < 2:
            raise ConfigError("bath.n_modes: discrete runs need at least two modes")
        if not self.bath.edge_ratio > 1:
            raise ConfigError("bath.edge_ratio: must exceed 1")
        if self.bath.span is not None and not self.bath.span.value > 0:
            raise ConfigError("bath.span: must be positive")
        for name in ("d_values", "lambda_values", "delta_d_fracs"):
            spec = getattr(s, name)
            if spec is None:
                continue
            vals = [q.value for q in spec.quantities()]
            if not vals:
                raise ConfigError(f"sweep.{name}: empty axis")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ConfigError(f"sweep.{name}: values must be strictly increasing")
            if name != "d_values" and vals[0] <= 0:
                raise ConfigError(f"sweep.{name}: values must be positive")
        if s.delta_d_fracs is not None and s.delta_d_fracs.quantities()[-1].value > 1.0:
            raise ConfigError("sweep.delta_d_fracs: fractions of d_node must not exceed 1")
        if s.lambda_values is not None and s.lambda_values.quantities()[0].unit == "lambda0":
            raise ConfigError("sweep.lambda_values: expected frequencies")
        sens = self.sensing
        if sens.t_int is not None:
            ts = sens.t_int.quantities()
            if len(ts) != len(sens.n_rep):
                raise ConfigError("sensing: t_int and n_rep must have the same length")
            if any(q.unit != "s" or not q.value > 0 for q in ts):
                raise ConfigError("sensing.t_int: must be positive absolute times")
            if any(n < 1 for n in sens.n_rep):
                raise ConfigError("sensing.n_rep: must be integers >= 1")
        if command == "crb" and sens.t_int is None:
            raise ConfigError("sensing: crb needs t_int and n_rep")
        return self

    # -- serialization ---------------------------------------------------
    def to_ini(self) -> str:
        p, b, s, sens = self.physical, self.bath, self.sweep, self.sensing
        lines = ["[physical]", f"omega0 = {p.omega0}"]
        if p.gamma is not None:
            lines.append(f"gamma = {p.gamma}")
        if p.g is not None:
            lines.append(f"g = {p.g}")
        lines += [
            f"lambda = {p.lam}",
            f"J = {p.J}",
            f"d = {p.d}",
            f"v = {p.v!r}",
            f"normalized = {str(p.normalized).lower()}",
            "",
            "[bath]",
            f"n_modes = {b.n_modes}",
        ]
        if b.span is not None:
            lines.append(f"span = {b.span}")
        lines += [
            f"edge_ratio = {b.edge_ratio!r}",
            f"use_k0_phase = {str(b.use_k0_phase).lower()}",
            "",
            "[initial]",
            f"state = {self.initial}",
            "",
            "[sweep]",
        ]
        if s.horizon is not None:
            lines.append(f"horizon = {s.horizon}")
        lines.append(f"samples_per_period = {s.samples_per_period}")
        for name in ("d_values", "lambda_values", "delta_d_fracs"):
            if getattr(s, name) is not None:
                lines.append(f"{name} = {getattr(s, name)}")
        lines.append(f"dps = {s.dps}")
        if s.min_prominence is not None:
            lines.append(f"min_prominence = {s.min_prominence!r}")
        if sens.t_int is not None:
            lines += ["", "[sensing]", f"t_int = {sens.t_int}", "n_rep = " + ", ".join(str(n) for n in sens.n_rep)]
        if self.output is not None:
            lines += ["", "[output]", f"path = {self.output}"]
        return "\n".join(lines) + "\n"


_KNOWN = {
    "physical": {"omega0", "gamma", "g", "lambda", "j", "d", "v", "normalized"},
    "bath": {"n_modes", "span", "edge_ratio", "use_k0_phase"},
    "initial": {"state"},
    "sweep": {"horizon", "samples_per_period", "d_values", "lambda_values", "delta_d_fracs", "dps", "min_prominence"},
    "sensing": {"t_int", "n_rep"},
    "output": {"path"},
}


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    for section in cp.sections():
        if section not in _KNOWN:
            raise ConfigError(f"unknown section [{section}]")
        extra = set(cp[section]) - _KNOWN[section]
        if extra:
            raise ConfigError(f"{section}: unknown key(s) {sorted(extra)}")

    def get(section, key):
        return cp.get(section, key) if cp.has_option(section, key) else None

    def quantity(section, key, kind):
        raw = get(section, key)
        return None if raw is None else parse_quantity(raw, kind, f"{section}.{key}")

    phys = PhysicalBlock()
    upd = {}
    for key, attr in (("omega0", "omega0"), ("gamma", "gamma"), ("g", "g"), ("lambda", "lam"), ("j", "J")):
        q = quantity("physical", key, "frequency")
        if q is not None:
            upd[attr] = q
    q = quantity("physical", "d", "length")
    if q is not None:
        upd["d"] = q
    if get("physical", "v") is not None:
        upd["v"] = _parse_numbers(get("physical", "v"), "physical.v")[0]
    if get("physical", "normalized") is not None:
        upd["normalized"] = _parse_bool(get("physical", "normalized"), "physical.normalized")
    phys = replace(phys, **upd)

    bath = BathBlock()
    upd = {}
    if get("bath", "n_modes") is not None:
        upd["n_modes"] = _parse_int(get("bath", "n_modes"), "bath.n_modes")
    if get("bath", "span") is not None:
        upd["span"] = quantity("bath", "span", "frequency")
    if get("bath", "edge_ratio") is not None:
        upd["edge_ratio"] = _parse_numbers(get("bath", "edge_ratio"), "bath.edge_ratio")[0]
    if get("bath", "use_k0_phase") is not None:
        upd["use_k0_phase"] = _parse_bool(get("bath", "use_k0_phase"), "bath.use_k0_phase")
    bath = replace(bath, **upd)

    sweep = SweepBlock()
    upd = {}
    if get("sweep", "horizon") is not None:
        upd["horizon"] = quantity("sweep", "horizon", "time")
    if get("sweep", "samples_per_period") is not None:
        upd["samples_per_period"] = _parse_int(get("sweep", "samples_per_period"), "sweep.samples_per_period")
    if get("sweep", "d_values") is not None:
        upd["d_values"] = parse_list(get("sweep", "d_values"), "length", "sweep.d_values")
    if get("sweep", "lambda_values") is not None:
        upd["lambda_values"] = parse_list(get("sweep", "lambda_values"), "frequency", "sweep.lambda_values")
    if get("sweep", "delta_d_fracs") is not None:
        upd["delta_d_fracs"] = parse_list(get("sweep", "delta_d_fracs"), "number", "sweep.delta_d_fracs")
    if get("sweep", "dps") is not None:
        upd["dps"] = _parse_int(get("sweep", "dps"), "sweep.dps")
    if get("sweep", "min_prominence") is not None:
        upd["min_prominence"] = _parse_numbers(get("sweep", "min_prominence"), "sweep.min_prominence")[0]
    sweep = replace(sweep, **upd)

    sensing = SensingBlock()
    if get("sensing", "t_int") is not None or get("sensing", "n_rep") is not None:
        if get("sensing", "t_int") is None or get("sensing", "n_rep") is None:
            raise ConfigError("sensing: t_int and n_rep must be given together")
        t_int = parse_list(get("sensing", "t_int"), "time", "sensing.t_int")
        n_rep = tuple(_parse_int(x, "sensing.n_rep") for x in get("sensing", "n_rep").split(",") if x.strip())
        sensing = SensingBlock(t_int=t_int, n_rep=n_rep)

    initial = get("initial", "state") or "eg"
    output = get("output", "path")
    return RunConfig(physical=phys, bath=bath, initial=initial.strip(), sweep=sweep, sensing=sensing, output=output)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    return parse_config(text)
