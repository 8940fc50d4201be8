import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from popperlab import oracle as O
from popperlab import validation
from popperlab.optics import SlitSpec, condition_on_slit
from popperlab.quantities import DiffractionScale, packet_momentum_sigma
from popperlab.source import SourceSpec, beam_sigma, evolve_pair, initial_state

SCALE = DiffractionScale.photon(702e-9)
MM = 1e-3


def test_initial_pair_quadrature_matches_closed_form():
    src = SourceSpec(0.1 * MM, 0.4 * MM, SCALE)
    a = O.sample_initial_pair(src, 2 * MM, 256, "closed")
    b = O.sample_initial_pair(src, 2 * MM, 256, "quadrature")
    assert O.max_rel_err(b.values, a.values, 0.99) < 1e-8


def test_initial_pair_symmetric_under_swap():
    g = O.sample_initial_pair(SourceSpec(0.1 * MM, 0.4 * MM, SCALE), 2 * MM, 128)
    assert np.allclose(g.values, g.values.T, rtol=0, atol=1e-14 * np.abs(g.values).max())


def test_spectral_zero_distance_and_norm():
    src = SourceSpec(0.1 * MM, 0.3 * MM, SCALE)
    g = O.sample_pair_state(initial_state(src), 3 * MM, 256)
    same = O.spectral_propagate(g, 0.0, SCALE.Lambda)
    assert np.allclose(same.values, g.values, rtol=0, atol=1e-12 * np.abs(g.values).max())
    moved = O.spectral_propagate(g, 0.05, SCALE.Lambda)
    n0, n1 = (float(np.sum(np.abs(v) ** 2)) for v in (g.values, moved.values))
    assert abs(n1 - n0) / n0 < 1e-12


def test_spectral_matches_closed_form():
    src = SourceSpec(0.1 * MM, 0.3 * MM, SCALE)
    L = 0.05
    ext = 8 * beam_sigma(src, L)
    g = O.spectral_propagate(O.sample_pair_state(initial_state(src), ext, 512), L, SCALE.Lambda)
    ref = O.sample_pair_state(evolve_pair(initial_state(src), L), ext, 512)
    assert O.max_rel_err(g.values, ref.values, 0.9) < 1e-6


def test_window_too_small_detected():
    src = SourceSpec(0.1 * MM, 0.3 * MM, SCALE)
    with pytest.raises(O.ExtentTooSmallError):
        O.check_window(O.sample_pair_state(initial_state(src), 0.2 * MM, 128))


def test_delta_like_slit_guard():
    src = SourceSpec(0.1 * MM, 0.3 * MM, SCALE)
    grid = O.sample_pair_state(initial_state(src), 2 * MM, 128)
    with pytest.raises(O.ResolutionError):
        O.quadrature_condition(grid, O.sample_gaussian(complex((1e-4 * MM) ** 2), 2 * MM, 128))


def test_wide_slit_gives_marginal_width():
    src = SourceSpec(0.1 * MM, 0.3 * MM, SCALE)
    grid = O.sample_pair_state(initial_state(src), 3 * MM, 256)
    flat = O.Grid1D(grid.extent, grid.n, np.ones(grid.n, dtype=complex))
    phi = O.quadrature_condition(grid, flat)
    gamma = O.fit_gamma(phi)
    # projecting on a flat slit leaves omega^2 + lc^2/4
    assert gamma.real == pytest.approx(src.omega2 + src.lc2 / 4, rel=1e-8)


def test_quadrature_conditioning_matches_closed_form():
    src = SourceSpec(0.12 * MM, 0.7 * MM, SCALE)
    pair = evolve_pair(initial_state(src), 0.2)
    eps = 0.05 * MM
    g = O.quad_conditioned_gamma(pair, eps)
    ref = condition_on_slit(pair, SlitSpec(eps)).gamma
    assert abs(g - ref) / abs(ref) < 1e-8


def test_grid_moments_of_real_gaussian():
    eps = 0.1 * MM
    dy, dk = O.grid_moments(O.sample_gaussian(complex(eps ** 2), 1.5 * MM, 1024))
    assert dy == pytest.approx(eps / 2, rel=1e-10)
    assert dk == pytest.approx(1 / eps, rel=1e-8)


def test_grid_moments_of_chirped_gaussian():
    g = complex(1, 2) * MM ** 2
    ext = 12 * math.sqrt(abs(g) ** 2 / (4 * g.real))
    _, dk = O.grid_moments(O.sample_gaussian(g, ext, 2048))
    assert dk == pytest.approx(packet_momentum_sigma(g), rel=1e-8)


@settings(max_examples=25, deadline=None)
@given(re=st.floats(0.01, 1.0), im=st.floats(-3.0, 3.0))
def test_uncertainty_product_bound(re, im):
    g = complex(re, im) * MM ** 2
    ext = 12 * math.sqrt(abs(g) ** 2 / (4 * g.real))
    dy, dk = O.grid_moments(O.sample_gaussian(g, ext, 1024))
    assert dy * dk >= 0.5 * (1 - 1e-9)


def test_rect_slit_shows_side_lobes():
    src = SourceSpec(0.02 * MM, 5 * MM, SCALE)
    pair = evolve_pair(initial_state(src), 0.05)
    grid = O.sample_pair_state(pair, 12 * MM, 1024)
    phi = O.spectral_propagate(O.pad(O.rect_slit_condition(grid, 0.3 * MM), 16), 1.0, SCALE.Lambda)
    rho = np.abs(phi.values) ** 2
    # a hard aperture gives a non-monotone envelope away from the centre
    half = rho[phi.n // 2:]
    d = np.diff(half[: np.argmax(half < 1e-6 * half[0]) or len(half)])
    assert np.any(d > 0)


def test_rect_slit_guard():
    grid = O.sample_pair_state(initial_state(SourceSpec(0.1 * MM, 0.3 * MM, SCALE)), 2 * MM, 64)
    with pytest.raises(O.ResolutionError):
        O.rect_slit_condition(grid, 0.05 * MM)


def test_refine_without_auto_is_unconverged():
    r = O.refine(lambda n, e: 1.0, 128, 1.0, 1e-6, auto=False)
    assert not r.converged


def test_refine_converges_on_stable_quantity():
    r = O.refine(lambda n, e: 1.0 + 1.0 / n ** 4, 64, 1.0, 1e-6)
    assert r.converged


def test_suite_subset_by_label():
    reports = validation.run_suite(["ghost-image", "lens-roundtrip"])
    labels = {r.quantity.split("[")[0] for r in reports}
    assert labels == {"ghost-image", "lens-roundtrip"}
    assert all(r.passed for r in reports)


def test_suite_unknown_label():
    with pytest.raises(KeyError):
        validation.run_suite(["no-such-check"])


def test_coarse_grid_flagged_unconverged():
    reports = validation.run_suite(["evolution"], base_n=64, auto=False)
    assert reports and not any(r.passed for r in reports)
    assert not any(r.converged for r in reports)


def test_full_suite_passes_and_converges():
    reports = validation.run_suite(jobs=4)
    bad = [r.quantity for r in reports if not r.passed]
    assert not bad, bad
