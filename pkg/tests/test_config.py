import math

import pytest
from hypothesis import given, strategies as st

from popperlab.config import (
    LENGTH_UNITS,
    dumps_scenario,
    load_scenario,
    loads_scenario,
    parse_quantity,
    save_scenario,
    scenario_hash,
)
from popperlab.errors import ConfigError
from popperlab.optics import Lens, Slit
from popperlab.presets import PRESET_NAMES, load_preset, preset_text, resolve

KIM_SHIH_MINIMAL = """
name: my-setup
wavelength: 0.702 um
source:
  correlation_length_squared: 0.049 mm2
  com_width: 0.5 cm
arm1:
  - free: 50 cm
  - lens: 500 mm
  - free: 1 m
  - slit: {full_width: 160 um, conversion: 0.5}
arm2:
  - free: 0.5 m
  - free: 1 m
  - detector
"""


def test_parse_quantity_units():
    assert parse_quantity("0.16 mm", LENGTH_UNITS, "x") == 0.00016
    assert parse_quantity("702 nm", LENGTH_UNITS, "x") == 7.02e-7
    assert parse_quantity("702nm", LENGTH_UNITS, "x") == 7.02e-7
    assert parse_quantity("5 µm", LENGTH_UNITS, "x") == 5e-6
    assert parse_quantity("inf", LENGTH_UNITS, "x", allow_inf=True) == math.inf


@pytest.mark.parametrize("text, msg", [
    ("0.16", "unit missing"),
    ("0.16 furlong", "unknown unit"),
    ("abc", "cannot parse"),
    ("inf", "infinity"),
])
def test_parse_quantity_errors(text, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_quantity(text, LENGTH_UNITS, "field")


def test_bare_number_rejected():
    with pytest.raises(ConfigError, match="expected a number with a unit"):
        parse_quantity(0.16, LENGTH_UNITS, "field")


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_preset_round_trip(tmp_path, name):
    s = load_preset(name)
    path = tmp_path / "s.yaml"
    save_scenario(s, path)
    again = load_scenario(path)
    assert again == s
    save_scenario(again, tmp_path / "t.yaml")
    assert (tmp_path / "t.yaml").read_text() == path.read_text()


def test_equivalent_file_reproduces_preset_hash():
    assert scenario_hash(loads_scenario(KIM_SHIH_MINIMAL)) == scenario_hash(load_preset("kim-shih"))


def test_hash_sensitive_to_physics():
    other = KIM_SHIH_MINIMAL.replace("160 um", "170 um")
    assert scenario_hash(loads_scenario(other)) != scenario_hash(load_preset("kim-shih"))


def test_kim_shih_contents():
    s = load_preset("kim-shih")
    assert s.wavelength == 702e-9
    assert s.slit.rect_full_width == pytest.approx(0.16e-3)
    assert any(isinstance(e, Lens) for e in s.arm1)


def test_negative_focal_length_rejected():
    bad = KIM_SHIH_MINIMAL.replace("lens: 500 mm", "lens: -500 mm")
    with pytest.raises(ConfigError, match=r"arm1\[1\]\.lens"):
        loads_scenario(bad)


def test_missing_unit_reports_field():
    bad = KIM_SHIH_MINIMAL.replace("free: 50 cm", "free: 50")
    with pytest.raises(ConfigError, match=r"arm1\[0\]"):
        loads_scenario(bad)


@pytest.mark.parametrize("mutate, msg", [
    (lambda t: t.replace("wavelength: 0.702 um\n", ""), "wavelength"),
    (lambda t: t.replace("  - detector\n", ""), "detector"),
    (lambda t: t.replace("  - slit: {full_width: 160 um, conversion: 0.5}\n", ""), "slit"),
    (lambda t: t + "colour: blue\n", "unknown field"),
    (lambda t: t.replace("com_width: 0.5 cm", "com_width: -1 mm"), "omega"),
    (lambda t: t + "detector_width: 0.5\n", "detector_width"),
    (lambda t: "[unclosed", "invalid YAML"),
    (lambda t: t.replace("- free: 1 m\n  - slit", "- mirror: 1 m\n  - slit"), "unknown element"),
])
def test_schema_violations(mutate, msg):
    with pytest.raises(ConfigError, match=msg):
        loads_scenario(mutate(KIM_SHIH_MINIMAL))


def test_massive_particle_block(tmp_path):
    text = KIM_SHIH_MINIMAL.replace("wavelength: 0.702 um", "particle: {mass: 1.674927e-27 kg, speed: 1000 m/s}")
    s = loads_scenario(text)
    assert s.source.scale.mode == "massive"
    save_scenario(s, tmp_path / "m.yaml")
    assert load_scenario(tmp_path / "m.yaml") == s


def test_epsilon_slit_and_infinite_omega():
    text = KIM_SHIH_MINIMAL.replace("{full_width: 160 um, conversion: 0.5}", "{epsilon: inf}")
    text = text.replace("com_width: 0.5 cm", "com_width: inf")
    s = loads_scenario(text)
    assert s.slit.is_open and math.isinf(s.source.omega)
    assert loads_scenario(dumps_scenario(s)) == s


def test_missing_file():
    with pytest.raises(ConfigError):
        load_scenario("/nonexistent/scenario.yaml")


def test_resolve_prefers_presets_then_files(tmp_path):
    assert resolve("strekalov") == load_preset("strekalov")
    p = tmp_path / "x.yaml"
    p.write_text(preset_text("strekalov"))
    assert resolve(str(p)) == load_preset("strekalov")
    with pytest.raises(ConfigError):
        resolve("no-such-preset")


@given(v=st.floats(1e-12, 1e3, allow_nan=False))
def test_float_round_trip_through_saved_form(v):
    assert parse_quantity(f"{v!r} m", LENGTH_UNITS, "x") == v


def test_slit_in_preset_is_real_slit():
    for name in PRESET_NAMES:
        assert sum(isinstance(e, Slit) for e in load_preset(name).arm1) == 1
