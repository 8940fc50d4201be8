import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from popperlab.errors import CalibrationError, DiffractionLimitError, PhysicsDomainError
from popperlab.patterns import (
    EXACT,
    LN2,
    PAPER,
    PRINTED,
    WidthConvention,
    detector_convolution,
    fit_correlation_length,
    invert_width,
    pattern_width,
    select_root,
    sweep_minimum,
    width_vs_slit_sweep,
    write_curve_csv,
)
from popperlab.quantities import reduced_wavelength

MM = 1e-3
LAM = reduced_wavelength(702e-9)


def test_no_propagation_width():
    st_ = pattern_width(0.3 * MM ** 2, 0.0, LAM)
    assert st_.W == pytest.approx(math.sqrt(0.3) * MM, rel=1e-15)


def test_published_width():
    st_ = pattern_width((0.632 * MM) ** 2, 2.0, LAM, PAPER)
    assert st_.fwhm_paper == pytest.approx(0.657 * MM, rel=2e-3)


def test_exact_fwhm_is_profile_half_maximum():
    x, D = 0.05 * MM ** 2, 1.3
    st_ = pattern_width(x, D, LAM)
    g = complex(x, LAM * D)
    y = np.linspace(0, 5 * MM, 500001)
    rho = np.exp(-2 * y ** 2 * g.real / abs(g) ** 2)
    half = y[np.argmin(np.abs(rho - 0.5))]
    assert st_.fwhm_exact == pytest.approx(2 * half, rel=1e-5)


def test_printed_convention_is_wider():
    a = pattern_width(0.05 * MM ** 2, 1.0, LAM, PAPER)
    b = pattern_width(0.05 * MM ** 2, 1.0, LAM, PRINTED)
    assert b.W > a.W
    assert a.fwhm_exact == b.fwhm_exact


def test_convention_validation():
    with pytest.raises(ValueError):
        WidthConvention("paper", 2.0)
    with pytest.raises(ValueError):
        WidthConvention("exact", 4.0)
    assert EXACT.fwhm_factor == pytest.approx(math.sqrt(2 * LN2))


def test_no_lens_inversion():
    small, large = invert_width(0.657 * MM, 2.0, LAM, PAPER)
    assert math.sqrt(small) == pytest.approx(0.632 * MM, rel=0.02)
    assert small < large


def test_with_lens_inversion():
    small, _ = invert_width(0.657 * MM, 1.0, LAM, PAPER)
    assert math.sqrt(small) == pytest.approx(0.236 * MM, rel=0.05)


def test_no_lens_inversion_fails_with_printed_constant():
    with pytest.raises(DiffractionLimitError, match="diffraction limit"):
        invert_width(0.657 * MM, 2.0, LAM, PRINTED)


def test_double_root():
    D = 1.5
    w2 = 2 * LAM * D
    small, large = invert_width(LN2 * math.sqrt(w2), D, LAM)
    assert small == pytest.approx(w2 / 2, rel=1e-7)
    assert large == pytest.approx(w2 / 2, rel=1e-7)


@settings(max_examples=300)
@given(x=st.floats(1e-10, 1e-5), D=st.floats(0, 5), c4=st.booleans())
def test_inversion_round_trip(x, D, c4):
    conv = PRINTED if c4 else PAPER
    fwhm = pattern_width(x, D, LAM, conv).fwhm_paper
    roots = invert_width(fwhm, D, LAM, conv)
    assert min(abs(r - x) / x for r in roots) < 1e-7
    for r in roots:
        if r > 0:
            assert pattern_width(r, D, LAM, conv).fwhm_paper == pytest.approx(fwhm, rel=1e-12)


def test_fit_correlation_length():
    lc2 = fit_correlation_length((0.236 * MM) ** 2, 0.08 * MM)
    assert lc2 == pytest.approx(0.049 * MM ** 2, rel=0.2)
    assert fit_correlation_length((0.08 * MM) ** 2, 0.08 * MM) == 0.0
    with pytest.raises(CalibrationError):
        fit_correlation_length((0.05 * MM) ** 2, 0.08 * MM)


def test_select_root():
    assert select_root((1e-8, 4e-7), 2e-4) == 4e-7
    assert select_root((4e-7, 1e-8), 1e-5) == 1e-8
    with pytest.raises(CalibrationError):
        select_root((1e-9, 2e-9), 1e-3)


def test_sweep_shape_and_asymptote():
    widths = np.linspace(0.02, 20, 2000) * MM
    c = width_vs_slit_sweep(0.04 * MM, 1.8, 702e-9, widths)
    i = int(np.argmin(c.fwhm_paper))
    assert 0 < i < len(c) - 1
    assert np.all(np.diff(c.fwhm_paper[: i + 1]) < 0)
    assert np.all(np.diff(c.fwhm_paper[i:]) > 0)
    assert c.fwhm_paper[-1] / (LN2 * 0.5 * widths[-1]) == pytest.approx(1.0, rel=2e-3)


def test_sweep_minimum_location():
    a_star = sweep_minimum(0.04 * MM, 1.8, 702e-9)
    x = (0.5 * a_star) ** 2 + (0.04 * MM) ** 2
    assert x == pytest.approx(LAM * 1.8, rel=1e-12)
    with pytest.raises(PhysicsDomainError):
        sweep_minimum(10 * MM, 1.8, 702e-9)


def test_perfect_correlation_diverges():
    c = width_vs_slit_sweep(0.0, 1.8, 702e-9, [1e-6, 1e-5, 1e-4])
    assert c.fwhm_paper[0] > 9 * c.fwhm_paper[1] > 81 * c.fwhm_paper[2] / 10


def test_detector_convolution():
    c = width_vs_slit_sweep(0.04 * MM, 1.8, 702e-9, [0.1 * MM, 1 * MM])
    assert np.array_equal(detector_convolution(c, 0.0).fwhm_paper, c.fwhm_paper)
    wider = [detector_convolution(c, w * MM).fwhm_paper for w in (0.1, 0.5, 1.0)]
    assert np.all(wider[0] < wider[1]) and np.all(wider[1] < wider[2])
    single = width_vs_slit_sweep(0.04 * MM, 1.8, 702e-9, [1 * MM])
    single = type(single)(single.slit_full_width, np.array([0.657 * MM]), single.fwhm_exact, single.x)
    assert detector_convolution(single, 0.5 * MM).fwhm_paper[0] == pytest.approx(0.8256 * MM, rel=1e-4)


def test_sweep_rejects_nonpositive_widths():
    with pytest.raises(PhysicsDomainError):
        width_vs_slit_sweep(0.04 * MM, 1.8, 702e-9, [0.0])


def test_curve_csv_format():
    c = width_vs_slit_sweep(0.04 * MM, 1.8, 702e-9, [0.5 * MM])
    buf = io.StringIO()
    write_curve_csv(c, buf)
    header, row = buf.getvalue().splitlines()
    assert header == "slit_full_width_mm,fwhm_paper_mm,fwhm_exact_mm,x_mm2"
    assert row.split(",")[0] == "5.00000000000e-01"
