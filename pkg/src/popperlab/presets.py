"""Bundled scenarios, stored as ordinary scenario files inside the package."""
from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Tuple

from .config import Scenario, load_scenario, loads_scenario
from .errors import ConfigError

PRESET_NAMES: Tuple[str, ...] = ("popper-nolens", "kim-shih", "strekalov")


def preset_text(name: str) -> str:
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r} (choose from {', '.join(PRESET_NAMES)})")
    return resources.files(__package__).joinpath("presets", f"{name}.yaml").read_text(encoding="utf-8")


def load_preset(name: str) -> Scenario:
    return loads_scenario(preset_text(name), f"preset {name}")


def resolve(ref: str) -> Scenario:
    """A preset name, or else a path to a scenario file."""
    if ref in PRESET_NAMES and not Path(ref).exists():
        return load_preset(ref)
    return load_scenario(ref)
