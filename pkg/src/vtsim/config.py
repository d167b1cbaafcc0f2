"""Scenario configuration: JSON schema, defaults and loading.

A scenario file is a JSON object. Every section is optional; omitted values
take the defaults below (50 vehicles, 100-byte reports, 100 ms Hellos,
1 Mbps, 250 m vehicle range, 1000 m RSU range and coverage, 100 m detection
distance). Relative paths inside the file resolve against the file's folder.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import jsonschema

STRATEGIES = ("VTS", "BROADCAST_ALL", "NEARBY_REPORT")
SWEEP_VARIABLES = (
    "reporters", "cs_range", "report_size", "m", "alpha", "interference_range", "count",
)

_pos = {"type": "number", "exclusiveMinimum": 0}
_point = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}

SCHEMA: dict = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "tiling": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "r": _pos,
                "d": _pos,
                "mode": {"enum": ["line", "disc", "ball", "LINE", "DISC", "BALL"]},
                "zone_cap": {"type": "integer", "minimum": 1},
            },
        },
        "radio": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "bandwidth": _pos, "tx_range": _pos, "cs_range": _pos, "slot_time": _pos,
                "difs": _pos, "cw_min": {"type": "integer", "minimum": 1}, "rsu_tx_range": _pos,
            },
        },
        "hello": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "interval": _pos,
                "expiry_periods": {"type": "integer", "minimum": 1},
                "via_channel": {"type": "boolean"},
                "burst_horizon": _pos,
            },
        },
        "fleet": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "count": {"type": "integer", "minimum": 0},
                "traces": {"type": ["string", "null"]},
                "speed": {"type": "array", "items": {"type": "number", "minimum": 0},
                          "minItems": 2, "maxItems": 2},
                "lanes": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "cluster": {"type": "integer", "minimum": 0},
                "background_clearance": {"type": "number", "minimum": 0},
            },
        },
        "credibility": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "oracle": {"enum": ["static", "blockchain", "cloud"]},
                "table": {"type": ["string", "object", "null"]},
                "range": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1},
                          "minItems": 2, "maxItems": 2},
                "latency": {"type": "number", "minimum": 0},
                "updates": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["time", "vehicle", "value"],
                        "additionalProperties": False,
                        "properties": {
                            "time": {"type": "number", "minimum": 0},
                            "vehicle": {"type": ["integer", "string"]},
                            "value": {"type": "number", "minimum": 0, "maximum": 1},
                        },
                    },
                },
            },
        },
        "strategies": {"type": "array", "items": {"enum": list(STRATEGIES)}, "minItems": 1,
                       "uniqueItems": True},
        "selection": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "m": {"type": "integer", "minimum": 1},
                "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "interference_range": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "reselect_period": _pos,
            },
        },
        "event": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "zone": {"type": ["integer", "null"], "minimum": 0},
                "position": {"oneOf": [_point, {"type": "null"}]},
                "time": {"type": "number", "minimum": 0},
            },
        },
        "report_size": {"type": "integer", "minimum": 0},
        "nearby_radius": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "sweep": {
            "type": ["object", "null"],
            "additionalProperties": False,
            "required": ["variable", "values"],
            "properties": {
                "variable": {"enum": list(SWEEP_VARIABLES)},
                "values": {"type": "array", "items": {"type": "number"}, "minItems": 1},
            },
        },
        "seeds": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "base": {"type": "integer", "minimum": 0},
                "count": {"type": "integer", "minimum": 1},
            },
        },
    },
}

DEFAULTS: dict = {
    "name": "scenario",
    "tiling": {"r": 1000.0, "d": 100.0, "mode": "disc", "zone_cap": 10**6},
    "radio": {
        "bandwidth": 1e6, "tx_range": 250.0, "cs_range": 100.0, "slot_time": 20e-6,
        "difs": 50e-6, "cw_min": 32, "rsu_tx_range": 1000.0,
    },
    "hello": {"interval": 0.1, "expiry_periods": 3, "via_channel": False, "burst_horizon": 0.5},
    "fleet": {
        "count": 50, "traces": None, "speed": [10.0, 30.0], "lanes": [-1.75, 1.75],
        "cluster": 0, "background_clearance": 10.0,
    },
    "credibility": {"oracle": "static", "table": None, "range": [0.0, 1.0], "latency": 0.0,
                    "updates": []},
    "strategies": list(STRATEGIES),
    "selection": {"m": 1, "alpha": 0.5, "interference_range": None, "reselect_period": 1.0},
    "event": {"zone": 0, "position": None, "time": 2.0},
    "report_size": 100,
    "nearby_radius": None,
    "sweep": None,
    "seeds": {"base": 0, "count": 1},
}


class ConfigError(ValueError):
    pass


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _field_path(err: jsonschema.ValidationError) -> str:
    parts = [str(p) for p in err.absolute_path]
    return ".".join(parts) or "<root>"


def validate(raw: Any) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        raise ConfigError(f"config error at {_field_path(err)}: {err.message}")


@dataclass(frozen=True)
class ScenarioConfig:
    data: dict
    base_dir: Path

    def __getitem__(self, key):
        return self.data[key]

    @property
    def name(self) -> str:
        return self.data["name"]

    def resolve(self, rel: Optional[str]) -> Optional[Path]:
        if rel is None:
            return None
        p = Path(rel)
        return p if p.is_absolute() else self.base_dir / p

    def with_overrides(self, **sections) -> "ScenarioConfig":
        return ScenarioConfig(_merge(self.data, sections), self.base_dir)

    def seeds(self) -> list[int]:
        s = self.data["seeds"]
        return list(range(s["base"], s["base"] + s["count"]))

    def point(self, variable: str, value) -> "ScenarioConfig":
        """Config for one sweep point."""
        if variable == "reporters":
            return self.with_overrides(fleet={"cluster": int(value)})
        if variable == "count":
            return self.with_overrides(fleet={"count": int(value)})
        if variable == "cs_range":
            return self.with_overrides(radio={"cs_range": float(value)})
        if variable == "report_size":
            return self.with_overrides(report_size=int(value))
        if variable == "m":
            return self.with_overrides(selection={"m": int(value)})
        if variable in ("alpha", "interference_range"):
            return self.with_overrides(selection={variable: float(value)})
        raise ConfigError(f"unknown sweep variable {variable!r}")


def from_dict(raw: dict, base_dir=".") -> ScenarioConfig:
    validate(raw)
    data = _merge(DEFAULTS, raw)
    validate(data)
    ev = data["event"]
    if ev["position"] is None and ev["zone"] is None:
        raise ConfigError("config error at event: give a zone or a position")
    if data["fleet"]["cluster"] > data["fleet"]["count"] and data["fleet"]["traces"] is None:
        raise ConfigError("config error at fleet.cluster: exceeds fleet.count")
    return ScenarioConfig(data, Path(base_dir))


def load(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return from_dict(raw, path.parent)
