"""Gaussian-state simulator for Popper's experiment with momentum-entangled pairs."""
from .config import Scenario, load_scenario, save_scenario, scenario_hash
from .errors import (
    CalibrationError,
    ConfigError,
    DiffractionLimitError,
    NoRealWaistError,
    OracleError,
    PhysicsDomainError,
    PopperLabError,
)
from .optics import Detector, FreeSpace, Lens, Slit, SlitSpec, run_pipeline
from .patterns import EXACT, PAPER, PRINTED, WidthConvention, invert_width, pattern_width
from .quantities import DiffractionScale, GaussianPacket
from .source import SourceSpec

__version__ = "0.1.0"

__all__ = [
    "CalibrationError", "ConfigError", "Detector", "DiffractionLimitError", "DiffractionScale",
    "EXACT", "FreeSpace", "GaussianPacket", "Lens", "NoRealWaistError", "OracleError", "PAPER",
    "PRINTED", "PhysicsDomainError", "PopperLabError", "Scenario", "Slit", "SlitSpec", "SourceSpec",
    "WidthConvention", "invert_width", "load_scenario", "pattern_width", "run_pipeline",
    "save_scenario", "scenario_hash",
]
