"""Scenario files: YAML with mandatory unit suffixes on every dimensioned value.

Example::

    name: kim-shih
    wavelength: 702 nm
    source:
      correlation_length_squared: 0.049 mm2
      com_width: 5 mm
    arm1:
      - free: 0.5 m
      - lens: 0.5 m
      - free: 1 m
      - slit: {full_width: 0.16 mm, conversion: 0.5}
    arm2:
      - free: 0.5 m
      - free: 1 m
      - detector
    detector_width: 0.5 mm

Saved files use plain meters with round-trip float formatting, so
load -> save -> load is exact.
"""
from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Optional, Tuple, Union

import yaml

from .errors import ConfigError, PopperLabError
from .optics import Detector, FreeSpace, Lens, OpticalElement, Slit, SlitSpec, validate_arms
from .quantities import DiffractionScale
from .source import SourceSpec

LENGTH_UNITS = {"m": "1", "cm": "1e-2", "mm": "1e-3", "um": "1e-6", "µm": "1e-6", "nm": "1e-9"}
AREA_UNITS = {"m2": "1", "cm2": "1e-4", "mm2": "1e-6", "um2": "1e-12", "µm2": "1e-12"}
MASS_UNITS = {"kg": "1", "g": "1e-3", "u": "1.66053906660e-27"}
SPEED_UNITS = {"m/s": "1", "km/s": "1e3"}

_QTY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf)\s*([^\s\d].*?)?\s*$")


def parse_quantity(text, units: dict, where: str, allow_inf: bool = False) -> float:
    """``"0.16 mm"`` -> 0.00016 (SI), exact to the nearest float."""
    if not isinstance(text, str):
        raise ConfigError(f"{where}: expected a number with a unit, got {text!r}")
    m = _QTY.match(text)
    if not m:
        raise ConfigError(f"{where}: cannot parse quantity {text!r}")
    number, unit = m.group(1), m.group(2)
    if number.lstrip("+-") == "inf":
        if not allow_inf:
            raise ConfigError(f"{where}: infinity is not allowed here")
        if unit is not None and unit not in units:
            raise ConfigError(f"{where}: unknown unit {unit!r}")
        return math.inf
    if unit is None:
        raise ConfigError(f"{where}: unit missing in {text!r} (use one of {', '.join(units)})")
    if unit not in units:
        raise ConfigError(f"{where}: unknown unit {unit!r} (use one of {', '.join(units)})")
    try:
        return float(Decimal(number) * Decimal(units[unit]))
    except InvalidOperation as exc:
        raise ConfigError(f"{where}: bad number {number!r}") from exc


def _meters(v: float) -> str:
    return "inf" if math.isinf(v) else f"{v!r} m"


def _kg(v: float) -> str:
    return f"{v!r} kg"


@dataclass(frozen=True)
class Scenario:
    name: str
    source: SourceSpec
    arm1: Tuple[OpticalElement, ...]
    arm2: Tuple[OpticalElement, ...]
    detector_width: Optional[float] = None
    description: str = ""

    @property
    def wavelength(self) -> float:
        return self.source.scale.wavelength

    @property
    def slit(self) -> SlitSpec:
        return next(e.spec for e in self.arm1 if isinstance(e, Slit))

    def with_source(self, source: SourceSpec) -> "Scenario":
        return Scenario(self.name, source, self.arm1, self.arm2, self.detector_width, self.description)

    def with_slit(self, slit: SlitSpec) -> "Scenario":
        arm1 = tuple(Slit(slit) if isinstance(e, Slit) else e for e in self.arm1)
        return Scenario(self.name, self.source, arm1, self.arm2, self.detector_width, self.description)


def _req(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise ConfigError(f"{where}: missing required field {key!r}")
    return d[key]


def _parse_element(raw, where: str) -> OpticalElement:
    if raw == "detector":
        return Detector()
    if not isinstance(raw, dict) or len(raw) != 1:
        raise ConfigError(f"{where}: expected one of 'free', 'lens', 'slit' or 'detector', got {raw!r}")
    (kind, value), = raw.items()
    try:
        if kind == "free":
            return FreeSpace(parse_quantity(value, LENGTH_UNITS, f"{where}.free"))
        if kind == "lens":
            return Lens(parse_quantity(value, LENGTH_UNITS, f"{where}.lens"))
        if kind == "slit":
            return Slit(_parse_slit(value, f"{where}.slit"))
    except ConfigError:
        raise
    except PopperLabError as exc:
        raise ConfigError(f"{where}.{kind}: {exc}") from exc
    raise ConfigError(f"{where}: unknown element {kind!r}")


def _parse_slit(raw, where: str) -> SlitSpec:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected a mapping")
    unknown = set(raw) - {"epsilon", "full_width", "conversion"}
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)}")
    if "full_width" in raw:
        a = parse_quantity(raw["full_width"], LENGTH_UNITS, f"{where}.full_width")
        conv = raw.get("conversion", 0.5)
        if not isinstance(conv, (int, float)) or isinstance(conv, bool):
            raise ConfigError(f"{where}.conversion: expected a plain number, got {conv!r}")
        spec = SlitSpec.from_rect(a, float(conv))
        if "epsilon" in raw:
            eps = parse_quantity(raw["epsilon"], LENGTH_UNITS, f"{where}.epsilon", allow_inf=True)
            if not math.isclose(eps, spec.epsilon, rel_tol=1e-12):
                raise ConfigError(f"{where}: epsilon disagrees with conversion * full_width")
        return spec
    return SlitSpec(parse_quantity(_req(raw, "epsilon", where), LENGTH_UNITS, f"{where}.epsilon",
                                   allow_inf=True))


def scenario_from_dict(d: dict, origin: str = "scenario") -> Scenario:
    if not isinstance(d, dict):
        raise ConfigError(f"{origin}: top level must be a mapping")
    known = {"name", "description", "wavelength", "particle", "source", "arm1", "arm2", "detector_width"}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"{origin}: unknown field(s) {sorted(unknown)}")
    try:
        if "particle" in d:
            if "wavelength" in d:
                raise ConfigError(f"{origin}: give either wavelength or particle, not both")
            part = d["particle"]
            scale = DiffractionScale.massive(
                parse_quantity(_req(part, "mass", "particle"), MASS_UNITS, "particle.mass"),
                parse_quantity(_req(part, "speed", "particle"), SPEED_UNITS, "particle.speed"),
            )
        else:
            scale = DiffractionScale.photon(parse_quantity(_req(d, "wavelength", origin), LENGTH_UNITS, "wavelength"))

        src = _req(d, "source", origin)
        if "correlation_length" in src and "correlation_length_squared" in src:
            raise ConfigError("source: give correlation_length or correlation_length_squared, not both")
        if "correlation_length_squared" in src:
            lc = math.sqrt(parse_quantity(src["correlation_length_squared"], AREA_UNITS,
                                          "source.correlation_length_squared"))
        else:
            lc = parse_quantity(_req(src, "correlation_length", "source"), LENGTH_UNITS, "source.correlation_length")
        omega = parse_quantity(_req(src, "com_width", "source"), LENGTH_UNITS, "source.com_width", allow_inf=True)
        source = SourceSpec(lc, omega, scale)

        arms = []
        for arm in ("arm1", "arm2"):
            raw = _req(d, arm, origin)
            if not isinstance(raw, list):
                raise ConfigError(f"{arm}: expected a list of elements")
            arms.append(tuple(_parse_element(e, f"{arm}[{i}]") for i, e in enumerate(raw)))
        validate_arms(*arms)

        det = d.get("detector_width")
        det = None if det is None else parse_quantity(det, LENGTH_UNITS, "detector_width")
        if det is not None and det < 0:
            raise ConfigError("detector_width: must be >= 0")
    except ConfigError:
        raise
    except PopperLabError as exc:
        raise ConfigError(f"{origin}: {exc}") from exc
    return Scenario(str(d.get("name", "")), source, arms[0], arms[1], det, str(d.get("description", "")))


def _element_to_dict(e: OpticalElement):
    if isinstance(e, Detector):
        return "detector"
    if isinstance(e, FreeSpace):
        return {"free": _meters(e.length)}
    if isinstance(e, Lens):
        return {"lens": _meters(e.focal_length)}
    s = e.spec
    if s.rect_full_width is not None:
        return {"slit": {"full_width": _meters(s.rect_full_width), "conversion": s.conversion}}
    return {"slit": {"epsilon": _meters(s.epsilon)}}


def scenario_to_dict(s: Scenario) -> dict:
    scale = s.source.scale
    d = {"name": s.name}
    if s.description:
        d["description"] = s.description
    if scale.mode == "massive":
        d["particle"] = {"mass": _kg(scale.mass), "speed": f"{scale.speed!r} m/s"}
    else:
        d["wavelength"] = _meters(scale.wavelength)
    d["source"] = {"correlation_length": _meters(s.source.lc), "com_width": _meters(s.source.omega)}
    d["arm1"] = [_element_to_dict(e) for e in s.arm1]
    d["arm2"] = [_element_to_dict(e) for e in s.arm2]
    if s.detector_width is not None:
        d["detector_width"] = _meters(s.detector_width)
    return d


def scenario_hash(s: Scenario) -> str:
    """SHA-256 of the canonical serialisation (physics only, names excluded)."""
    d = scenario_to_dict(s)
    d.pop("name", None)
    d.pop("description", None)
    return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


def loads_scenario(text: str, origin: str = "scenario") -> Scenario:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{origin}: invalid YAML: {exc}") from exc
    return scenario_from_dict(data, origin)


def dumps_scenario(s: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(s), sort_keys=False, allow_unicode=True)


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    return loads_scenario(text, str(path))


def save_scenario(s: Scenario, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_scenario(s), encoding="utf-8")
