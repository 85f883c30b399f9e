"""Flat ``key = value`` configuration files.

One assignment per line, ``#`` starts a comment. Recognized keys::

    chip_area_mm2 = 100            # chip geometry
    substrate_thickness_mm = 0.4
    film_thickness_um = 0.1
    normal_thickness_um = 6
    hotspot_area_mm2 = 10
    wirebonds.count = 300
    wirebonds.wire_radius_um = 12
    wirebonds.wire_length_mm = 2
    wirebonds.mean_free_path_um = 25
    event.conversion_efficiency = 0.57
    event.qubit_frequency_GHz = 5
    event.improved_suppression = 100
    event.trap_offset_K = 1
    backside.qubit_c_fF = 100      # any BacksideCircuit field
    material.Al.tau0_ns = 440      # any MaterialParams field of a built-in
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Union

from .design import BacksideCircuit
from .errors import ConfigError, DomainError, UnknownMaterialError
from .event import ChipGeometry, EventConfig, Wirebonds
from .materials import MaterialParams, builtin_material

_GEOMETRY_KEYS = {f.name for f in dataclasses.fields(ChipGeometry)} - {"wirebonds"}
_WIREBOND_KEYS = {f.name for f in dataclasses.fields(Wirebonds)}
_EVENT_KEYS = {"conversion_efficiency", "qubit_frequency_GHz", "improved_suppression", "trap_offset_K"}
_BACKSIDE_KEYS = {f.name for f in dataclasses.fields(BacksideCircuit)}
_MATERIAL_KEYS = {f.name for f in dataclasses.fields(MaterialParams)} - {"name"}


@dataclass
class Settings:
    """Parsed overrides; every section is a plain dict of field values."""

    geometry: Dict[str, float] = field(default_factory=dict)
    wirebonds: Dict[str, float] = field(default_factory=dict)
    event: Dict[str, float] = field(default_factory=dict)
    backside: Dict[str, float] = field(default_factory=dict)
    materials: Dict[str, Dict[str, float]] = field(default_factory=dict)

    def chip_geometry(self, base: ChipGeometry = None) -> ChipGeometry:
        base = base or ChipGeometry()
        try:
            wb = dataclasses.replace(base.wirebonds, **self.wirebonds)
            return dataclasses.replace(base, wirebonds=wb, **self.geometry)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid geometry: {exc}") from None

    def event_config(self, **kw) -> EventConfig:
        merged = {**self.event, **kw}
        return EventConfig(**merged)

    def backside_circuit(self, **kw) -> BacksideCircuit:
        return BacksideCircuit(**{**self.backside, **kw})

    def material(self, name: str) -> MaterialParams:
        mat = builtin_material(name)
        changes = self.materials.get(name)
        if not changes:
            return mat
        try:
            return mat.replace(**changes)
        except DomainError as exc:
            raise ConfigError(str(exc)) from None


def _number(text: str, key: str, lineno: int):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} needs a number, got {text!r}") from None
    if key.endswith(".count") or key == "count":
        if value != int(value):
            raise ConfigError(f"line {lineno}: {key} must be an integer")
        return int(value)
    return value


def parse_config(text: str) -> Settings:
    settings = Settings()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        parts = key.split(".")
        if len(parts) == 1 and key in _GEOMETRY_KEYS:
            settings.geometry[key] = _number(value, key, lineno)
        elif len(parts) == 2 and parts[0] == "wirebonds" and parts[1] in _WIREBOND_KEYS:
            settings.wirebonds[parts[1]] = _number(value, key, lineno)
        elif len(parts) == 2 and parts[0] == "event" and parts[1] in _EVENT_KEYS:
            settings.event[parts[1]] = _number(value, key, lineno)
        elif len(parts) == 2 and parts[0] == "backside" and parts[1] in _BACKSIDE_KEYS:
            settings.backside[parts[1]] = _number(value, key, lineno)
        elif len(parts) == 3 and parts[0] == "material" and parts[2] in _MATERIAL_KEYS:
            try:
                builtin_material(parts[1])
            except UnknownMaterialError as exc:
                raise ConfigError(f"line {lineno}: {exc.args[0]}") from None
            settings.materials.setdefault(parts[1], {})[parts[2]] = _number(value, key, lineno)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    return settings


def load_config(path: Union[str, Path]) -> Settings:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)
