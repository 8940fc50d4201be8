import io
import math

import numpy as np
import pytest

from popperlab.commands import (
    SIM_COLUMNS,
    cmd_fit,
    cmd_oracle,
    cmd_simulate,
    cmd_sweep,
    effective_distance,
    parse_widths,
    write_fit_csv,
    write_simulation_csv,
)
from popperlab.errors import DiffractionLimitError, PhysicsDomainError
from popperlab.optics import SlitSpec
from popperlab.patterns import LN2, PRINTED, sweep_minimum
from popperlab.presets import load_preset
from popperlab.source import SourceSpec, beam_width

MM = 1e-3


def wide(s, lc=None):
    return s.with_source(SourceSpec(s.source.lc if lc is None else lc, math.inf, s.source.scale))


def test_simulate_kim_shih_width():
    r = cmd_simulate(load_preset("kim-shih"))
    assert r.conditioned and r.ok
    assert r.stats.fwhm_paper == pytest.approx(0.657 * MM, rel=0.05)


def test_simulate_open_slit_reports_beam_width():
    s = load_preset("kim-shih")
    s = s.with_slit(SlitSpec(math.inf))
    r = cmd_simulate(s)
    assert not r.conditioned
    assert r.stats.W == r.beam_width == beam_width(s.source, 1.5)
    assert r.ok


def test_simulate_invariants_hold_on_presets():
    for name in ("popper-nolens", "kim-shih", "strekalov"):
        r = cmd_simulate(load_preset(name))
        assert r.ok, r.invariants
        assert r.stats.W <= r.beam_width


def test_simulate_csv_has_units_in_headers():
    buf = io.StringIO()
    write_simulation_csv(cmd_simulate(load_preset("strekalov")), buf)
    header, row = buf.getvalue().splitlines()
    assert tuple(header.split(",")) == SIM_COLUMNS
    for col, value in zip(SIM_COLUMNS, row.split(",")):
        if "e+" in value or "e-" in value:
            assert col.endswith(("_mm", "_mm2", "_m", "_per_mm")), col


def test_effective_distance():
    assert effective_distance(load_preset("kim-shih")) == pytest.approx(1.0, rel=1e-12)
    assert effective_distance(load_preset("popper-nolens")) == pytest.approx(2.0, rel=1e-12)
    assert effective_distance(load_preset("strekalov")) == pytest.approx(1.8, rel=1e-12)


def test_fit_kim_shih():
    r = cmd_fit(load_preset("kim-shih"), 0.657 * MM)
    assert math.sqrt(r.x) == pytest.approx(0.236 * MM, rel=0.05)
    assert r.lc2 == pytest.approx(0.049 * MM ** 2, rel=0.2)
    assert abs(r.residual) < 1e-15


def test_fit_double_root():
    s = load_preset("kim-shih")
    fwhm = LN2 * math.sqrt(2 * s.source.scale.Lambda * 1.0)
    r = cmd_fit(s, fwhm)
    assert r.double_root


def test_fit_no_lens_reading():
    s = load_preset("popper-nolens")
    r = cmd_fit(s, 0.657 * MM)
    assert math.sqrt(r.x) == pytest.approx(0.632 * MM, rel=0.02)
    with pytest.raises(DiffractionLimitError):
        cmd_fit(s, 0.657 * MM, PRINTED)


@pytest.mark.parametrize("name, lc_mm", [("kim-shih", 0.2), ("popper-nolens", 0.15), ("strekalov", 0.04)])
def test_fit_recovers_simulated_correlation_length(name, lc_mm):
    s = wide(load_preset(name), lc_mm * MM)
    sim = cmd_simulate(s)
    small, large = (cmd_fit(s, sim.stats.fwhm_paper, root=k) for k in ("small", "large"))
    best = min((small, large), key=lambda r: abs(r.lc2 - (lc_mm * MM) ** 2))
    assert math.sqrt(best.lc2) == pytest.approx(lc_mm * MM, rel=1e-10)


def test_fit_rejects_open_slit():
    s = load_preset("kim-shih").with_slit(SlitSpec(math.inf))
    with pytest.raises(PhysicsDomainError):
        cmd_fit(s, 0.657 * MM)


def test_fit_csv_row():
    buf = io.StringIO()
    write_fit_csv(cmd_fit(load_preset("kim-shih"), 0.657 * MM), buf)
    assert buf.getvalue().splitlines()[1].startswith("1.00000000000e+00,6.57000000000e-01,")


def test_parse_widths():
    assert parse_widths("0.1,0.2") == [0.1e-3, 0.2e-3]
    assert parse_widths("0:1:5") == pytest.approx([0, 0.25e-3, 0.5e-3, 0.75e-3, 1e-3])
    for bad in ("", "a,b", "0:1", "0:1:1"):
        with pytest.raises(ValueError):
            parse_widths(bad)


def test_sweep_strekalov_shape():
    s = load_preset("strekalov")
    widths = np.linspace(0.01, 3.0, 600) * MM
    c = cmd_sweep(s, widths)
    i = int(np.argmin(c.fwhm_paper))
    assert np.all(np.diff(c.fwhm_paper[: i + 1]) < 0) and np.all(np.diff(c.fwhm_paper[i:]) > 0)
    assert c.fwhm_paper[0] > 5 * c.fwhm_paper[i]
    assert c.slit_full_width[i] == pytest.approx(sweep_minimum(0.04 * MM, 1.8, 702e-9), rel=0.01)


def test_sweep_detector_override_and_jobs():
    s = load_preset("strekalov")
    widths = np.linspace(0.05, 2.0, 37) * MM
    with_det = cmd_sweep(s, widths)
    without = cmd_sweep(s, widths, detector_width=0.0)
    assert np.all(with_det.fwhm_paper > without.fwhm_paper)
    np.testing.assert_allclose(with_det.fwhm_paper ** 2 - without.fwhm_paper ** 2, (0.5 * MM) ** 2, rtol=1e-9)
    par = cmd_sweep(s, widths, jobs=4)
    assert np.array_equal(par.fwhm_paper, with_det.fwhm_paper)


def test_sweep_diverges_for_perfect_correlation():
    s = wide(load_preset("strekalov"), 1e-12)
    c = cmd_sweep(s, [1e-6, 1e-5], detector_width=0.0)
    assert c.fwhm_paper[0] > 9 * c.fwhm_paper[1]


def test_oracle_subset_and_fail_fast():
    reports = cmd_oracle(["lens-roundtrip", "ghost-image"])
    assert [r.quantity.split("[")[0] for r in reports][0] == "lens-roundtrip"
    assert all(r.passed for r in reports)
    coarse = cmd_oracle(["evolution", "ghost-image"], grid_n=64, refine=False, fail_fast=True)
    assert all(r.quantity.startswith("evolution") for r in coarse)
