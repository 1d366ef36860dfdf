"""
Text parsers for atten-forge.

This module provides:
- ConfigParser: the flat ``key = value unit`` chip configuration format,
  with exact decimal unit scaling and a canonical writer
- NetlistParser: one element per line, ``R|C|L name n1 n2 value``, with
  ``.port1`` / ``.port2`` directives

Both report errors with 1-based line numbers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Any, Optional

from pydantic import ValidationError

from .design import synth_ttype
from .exceptions import ConfigError, NetlistError
from .mna import Element, ElementKind, Netlist
from .models import ChipConfig, FrequencyGrid

# Unit families: accepted suffix -> decimal exponent to SI
RESISTANCE = {"ohm": 0}
CAPACITANCE = {"ff": -15, "pf": -12}
FREQUENCY = {"ghz": 9}
ANGLE = {"deg": 0}
VOLTAGE = {"v": 0}
LEVEL = {"db": 0}
UNITLESS: dict[str, int] = {}


@dataclass(frozen=True)
class KeySpec:
    path: tuple[str, ...]
    units: dict[str, int]
    required: bool = True
    integer: bool = False


def _switch_keys(prefix: str, path: tuple[str, ...]) -> dict[str, KeySpec]:
    return {
        f"{prefix}.r_on": KeySpec((*path, "r_on"), RESISTANCE),
        f"{prefix}.c_off": KeySpec((*path, "c_off"), CAPACITANCE),
        f"{prefix}.c_par_on": KeySpec((*path, "c_par_on"), CAPACITANCE),
    }


def _resistor_keys(prefix: str, path: tuple[str, ...]) -> dict[str, KeySpec]:
    return {
        prefix: KeySpec((*path, "r"), RESISTANCE),
        f"{prefix}_cpar": KeySpec((*path, "c_par"), CAPACITANCE),
    }


def _line_keys(prefix: str) -> dict[str, KeySpec]:
    path = ("chip", prefix)
    return {
        f"{prefix}.z_c": KeySpec((*path, "z_c"), RESISTANCE),
        f"{prefix}.theta": KeySpec((*path, "theta_ref_deg"), ANGLE),
        f"{prefix}.f_ref": KeySpec((*path, "f_ref_hz"), FREQUENCY),
    }


# Canonical key order; the writer emits keys in exactly this order.
CONFIG_KEYS: dict[str, KeySpec] = {
    "z0": KeySpec(("chip", "z0"), RESISTANCE),
    "unit4.target": KeySpec(("targets", "unit4_db"), LEVEL, required=False),
    **_resistor_keys("unit4.r1", ("chip", "unit4", "r1")),
    **_resistor_keys("unit4.r2", ("chip", "unit4", "r2")),
    "unit4.c_comp": KeySpec(("chip", "unit4", "c_comp"), CAPACITANCE),
    **_switch_keys("unit4.m1", ("chip", "unit4", "series_switch")),
    **_switch_keys("unit4.m2", ("chip", "unit4", "shunt_switch")),
    **_line_keys("tl_a"),
    "unit2.target": KeySpec(("targets", "unit2_db"), LEVEL, required=False),
    **_resistor_keys("unit2.r1", ("chip", "unit2", "r1")),
    **_resistor_keys("unit2.r2", ("chip", "unit2", "r2")),
    "unit2.c_comp": KeySpec(("chip", "unit2", "c_comp"), CAPACITANCE),
    **_switch_keys("unit2.m2", ("chip", "unit2", "shunt_switch")),
    **_line_keys("tl_b"),
    **_resistor_keys("cont.r2", ("chip", "cont", "r2")),
    "cont.fet.r_min": KeySpec(("chip", "cont", "fet", "r_min"), RESISTANCE),
    "cont.fet.r_max": KeySpec(("chip", "cont", "fet", "r_max"), RESISTANCE),
    "cont.fet.vc_lo": KeySpec(("chip", "cont", "fet", "vc_lo"), VOLTAGE),
    "cont.fet.vc_hi": KeySpec(("chip", "cont", "fet", "vc_hi"), VOLTAGE),
    "cont.fet.shape": KeySpec(("chip", "cont", "fet", "shape"), UNITLESS),
    "grid.f_start": KeySpec(("grid", "f_start"), FREQUENCY),
    "grid.f_stop": KeySpec(("grid", "f_stop"), FREQUENCY),
    "grid.points": KeySpec(("grid", "count"), UNITLESS, integer=True),
    "run.f0": KeySpec(("run", "f0_hz"), FREQUENCY),
    "run.step": KeySpec(("run", "step_db"), LEVEL),
}

SECTION_COMMENTS = {
    "z0": "Reference impedance",
    "unit4.target": "4-dB T-type unit (series switch M1, shunt switch M2)",
    "tl_a.z_c": "Line between unit4 and unit2",
    "unit2.target": "2-dB simplified T-type unit (metal-line arms)",
    "tl_b.z_c": "Line between unit2 and the continuous unit",
    "cont.r2": "Continuous unit (r2 in series with the tuned FET)",
    "grid.f_start": "Frequency grid and run options",
}

SYNTH_FILLED = {
    "unit4": ("unit4.r1", "unit4.r2", "unit4.target"),
    "unit2": ("unit2.r1", "unit2.r2", "unit2.target"),
}


def _set_path(tree: dict[str, Any], path: tuple[str, ...], value: Any) -> None:
    node = tree
    for part in path[:-1]:
        node = node.setdefault(part, {})
    node[path[-1]] = value


class ConfigParser:
    """Parses and writes chip configuration text."""

    LINE_PATTERN = re.compile(
        r"^(?P<key>[A-Za-z0-9_.]+)\s*=\s*(?P<value>[^\s#]+)(?:\s+(?P<unit>[A-Za-z]+))?\s*(?:#.*)?$"
    )

    def __init__(self, keys: Optional[dict[str, KeySpec]] = None):
        self.keys = keys if keys is not None else CONFIG_KEYS

    def _read_value(self, key: str, spec: KeySpec, raw: str, unit: Optional[str], line: int):
        try:
            number = Decimal(raw)
        except InvalidOperation as e:
            raise ConfigError(f"'{raw}' is not a number", line=line, key=key) from e
        if not number.is_finite():
            raise ConfigError(f"'{raw}' is not finite", line=line, key=key)
        if spec.units:
            if unit is None:
                raise ConfigError(
                    f"missing unit, expected one of {sorted(spec.units)}", line=line, key=key
                )
            exponent = spec.units.get(unit.lower())
            if exponent is None:
                raise ConfigError(
                    f"unit '{unit}' does not fit, expected one of {sorted(spec.units)}",
                    line=line,
                    key=key,
                )
            number = number.scaleb(exponent)
        elif unit is not None:
            raise ConfigError(f"'{key}' takes no unit, got '{unit}'", line=line, key=key)
        if spec.integer:
            if number != number.to_integral_value():
                raise ConfigError(f"'{raw}' is not an integer", line=line, key=key)
            return int(number)
        return float(number)

    def read_entries(self, text: str) -> tuple[dict[str, Any], dict[str, int]]:
        """Raw values by key and the line each key came from."""
        values: dict[str, Any] = {}
        lines: dict[str, int] = {}
        for number, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            match = self.LINE_PATTERN.match(stripped)
            if not match:
                raise ConfigError(f"malformed line {stripped!r}", line=number)
            key = match.group("key").lower()
            spec = self.keys.get(key)
            if spec is None:
                raise ConfigError("unknown key", line=number, key=key)
            if key in values:
                raise ConfigError(f"duplicate key (first on line {lines[key]})", line=number, key=key)
            values[key] = self._read_value(key, spec, match.group("value"), match.group("unit"), number)
            lines[key] = number
        return values, lines

    def parse(self, text: str, synthesize: bool = False) -> ChipConfig:
        """
        Build a validated ChipConfig.

        Args:
            synthesize: Replace unitN.r1 / unitN.r2 with the T-pad values for unitN.target

        Raises:
            ConfigError: With the offending key and line
        """
        values, lines = self.read_entries(text)
        end_line = len(text.splitlines()) + 1
        if synthesize:
            for r1_key, r2_key, target_key in SYNTH_FILLED.values():
                if target_key in values and "z0" in values:
                    r1, r2 = synth_ttype(values[target_key], values["z0"])
                    values[r1_key], values[r2_key] = r1, r2
        for key, spec in self.keys.items():
            if spec.required and key not in values:
                raise ConfigError("missing required key", line=end_line, key=key)

        tree: dict[str, Any] = {}
        for key, value in values.items():
            _set_path(tree, self.keys[key].path, value)
        grid_raw = tree.pop("grid")
        if grid_raw["count"] < 1:
            raise ConfigError("need at least one point", line=lines.get("grid.points"), key="grid.points")
        if grid_raw["count"] > 1 and grid_raw["f_stop"] <= grid_raw["f_start"]:
            raise ConfigError("f_stop must exceed f_start", line=lines.get("grid.f_stop"), key="grid.f_stop")
        try:
            grid = FrequencyGrid.linspace(grid_raw["f_start"], grid_raw["f_stop"], grid_raw["count"])
        except (ValidationError, ValueError) as e:
            raise ConfigError(f"invalid frequency grid: {e}", line=lines.get("grid.f_start"), key="grid.f_start") from e
        try:
            return ChipConfig.model_validate({**tree, "grid": grid})
        except ValidationError as e:
            first = e.errors()[0]
            key = self._key_for_location(tuple(str(p) for p in first["loc"]))
            raise ConfigError(first["msg"], line=lines.get(key) if key else None, key=key) from e

    def _key_for_location(self, loc: tuple[str, ...]) -> Optional[str]:
        for key, spec in self.keys.items():
            if spec.path == loc:
                return key
        for key, spec in self.keys.items():
            if spec.path[: len(loc)] == loc:
                return key
        return None

    @staticmethod
    def _format_value(value: float, spec: KeySpec) -> str:
        if spec.integer:
            return str(int(value))
        if not spec.units:
            return repr(float(value))
        unit, exponent = next(iter(spec.units.items()))
        if value == 0:
            return f"0 {unit}"
        scaled = Decimal(repr(float(value))).scaleb(-exponent).normalize()
        return f"{format(scaled, 'f')} {unit}"

    def write(self, config: ChipConfig) -> str:
        """Canonical text for a configuration; parse(write(c)) == c."""
        flat = config.model_dump()
        flat["grid"] = {
            "f_start": config.grid.points[0],
            "f_stop": config.grid.points[-1],
            "count": len(config.grid),
        }
        lines = ["# atten-forge chip configuration"]
        for key, spec in self.keys.items():
            node: Any = flat
            for part in spec.path:
                node = node[part]
            if node is None:
                continue
            if key in SECTION_COMMENTS:
                lines.extend(["", f"# {SECTION_COMMENTS[key]}"])
            lines.append(f"{key} = {self._format_value(node, spec)}")
        return "\n".join(lines) + "\n"


def parse_config(text: str, synthesize: bool = False) -> ChipConfig:
    return ConfigParser().parse(text, synthesize=synthesize)


def write_config(config: ChipConfig) -> str:
    return ConfigParser().write(config)


class NetlistParser:
    """Parses netlist text into a validated Netlist."""

    ELEMENT_PATTERN = re.compile(
        r"^(?P<kind>[RCLrcl])\s+(?P<name>\S+)\s+(?P<n1>\d+)\s+(?P<n2>\d+)\s+(?P<value>\S+)$"
    )
    PORT_PATTERN = re.compile(r"^\.(?P<port>port[12])\s+(?P<p>\d+)\s+(?P<n>\d+)$", re.IGNORECASE)
    VALUE_PATTERN = re.compile(
        r"^(?P<number>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)(?P<suffix>meg|[fpnumkg])?$",
        re.IGNORECASE,
    )
    SUFFIXES = {
        "f": 1e-15, "p": 1e-12, "n": 1e-9, "u": 1e-6, "m": 1e-3,
        "k": 1e3, "meg": 1e6, "g": 1e9,
    }

    def parse_value(self, text: str, line: int) -> float:
        match = self.VALUE_PATTERN.match(text)
        if not match:
            raise NetlistError(f"bad element value {text!r}", line=line)
        suffix = (match.group("suffix") or "").lower()
        return float(match.group("number")) * self.SUFFIXES.get(suffix, 1.0)

    def parse(self, text: str) -> Netlist:
        elements: list[Element] = []
        ports = {"port1": (1, 0), "port2": (2, 0)}
        max_node = 0
        for number, line in enumerate(text.splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped or stripped.startswith("*") or stripped.lower() == ".end":
                continue
            port = self.PORT_PATTERN.match(stripped)
            if port:
                pair = (int(port.group("p")), int(port.group("n")))
                ports[port.group("port").lower()] = pair
                max_node = max(max_node, *pair)
                continue
            match = self.ELEMENT_PATTERN.match(stripped)
            if not match:
                raise NetlistError(f"malformed line {stripped!r}", line=number)
            nodes = (int(match.group("n1")), int(match.group("n2")))
            try:
                elements.append(
                    Element(
                        kind=ElementKind(match.group("kind").upper()),
                        value=self.parse_value(match.group("value"), number),
                        nodes=nodes,
                        name=match.group("name"),
                    )
                )
            except ValidationError as e:
                raise NetlistError(e.errors()[0]["msg"], line=number) from e
            max_node = max(max_node, *nodes)
        try:
            return Netlist(
                elements=tuple(elements),
                node_count=max(max_node + 1, 2),
                port1=ports["port1"],
                port2=ports["port2"],
            )
        except ValidationError as e:
            raise NetlistError(e.errors()[0]["msg"]) from e


def parse_netlist(text: str) -> Netlist:
    return NetlistParser().parse(text)
