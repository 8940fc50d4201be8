"""Named oracle checks comparing closed forms against brute-force numerics.

Each check returns a list of :class:`~popperlab.oracle.OracleReport`. Random
parameter points come from a fixed seed, so a suite run is reproducible.
Lengths are drawn on a 0.1 mm scale and distances on the scale where
``Lambda * L`` is comparable to the squared widths.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Optional

import numpy as np

from . import oracle as O
from .optics import (
    Detector, FreeSpace, Lens, Slit, SlitSpec, condition_on_slit, free_propagate,
    lens_transform, run_pipeline,
)
from .quantities import (
    DiffractionScale, GaussianPacket, packet_intensity_sigma, packet_momentum_sigma, packet_width,
)
from .source import (
    SourceSpec, beam_sigma, evolve_pair, initial_momentum_spread, initial_position_spread,
    initial_state,
)

SCALE = DiffractionScale.photon(702e-9)
UNIT = 1e-4
SEED = 20240917
MIN_2D_N = 256
MAX_2D_N = 2048


def unit_distance() -> float:
    """Distance over which Lambda * L equals UNIT**2."""
    return UNIT ** 2 / SCALE.Lambda


def random_points(count: int, seed: int = SEED) -> List[dict]:
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(count):
        pts.append(dict(
            eps=float(rng.uniform(0.5, 2.0)) * UNIT,
            lc=float(rng.uniform(0.5, 2.0)) * UNIT,
            omega=float(rng.uniform(2.0, 5.0)) * UNIT,
            L1=float(rng.uniform(0.0, 2.0)) * unit_distance(),
            L2=float(rng.uniform(0.0, 2.0)) * unit_distance(),
        ))
    return pts


def _rel(a, b) -> float:
    return abs(a - b) / abs(b)


def _grid2d(sigma: float, min_scale: float, base_n: Optional[int]):
    if base_n is not None:
        return base_n, 8.0 * sigma
    n, ext = O.auto_grid(sigma, min_scale)
    return max(n, MIN_2D_N), ext


def _grid1d(sigma: float, min_scale: float, base_n: Optional[int]):
    if base_n is not None:
        return base_n, 8.0 * sigma
    n, ext = O.auto_grid(sigma, min_scale)
    return max(n, O.DEFAULT_N), ext


def _report(label, analytic, r: O.Refined, tol, numeric=None, rel_err=None, note="") -> O.OracleReport:
    value = r.value if numeric is None else numeric
    err = _rel(value, analytic) if rel_err is None else rel_err
    return O.OracleReport(label, analytic, value, float(err), tol, r.converged, r.n, r.extent, note)


def check_initial_state(base_n=None, auto=True) -> List[O.OracleReport]:
    """Closed-form source amplitude vs momentum-space quadrature, pointwise."""
    tol = 1e-8
    out = []
    for i, p in enumerate(random_points(2, SEED + 1)):
        src = SourceSpec(p["lc"], p["omega"], SCALE)

        def measure(n, ext):
            a = O.sample_initial_pair(src, ext, n, "closed")
            b = O.sample_initial_pair(src, ext, n, "quadrature")
            return O.max_rel_err(b.values, a.values, 0.99)

        n, ext = _grid2d(2.0 * initial_position_spread(src), src.lc, base_n)
        r = O.refine(measure, n, ext, tol, max_n=MAX_2D_N, absolute=True, auto=auto)
        out.append(_report(f"initial-state[{i}]", 0.0, r, tol, rel_err=r.value,
                           note="max pointwise rel. error, central 99% mass"))
    return out


def check_evolution(base_n=None, auto=True) -> List[O.OracleReport]:
    """Closed-form evolved pair vs spectral propagation, plus unitarity and composition."""
    tol = 1e-6
    out = []
    for i, p in enumerate(random_points(2, SEED + 2)):
        src = SourceSpec(p["lc"], p["omega"], SCALE)
        L = p["L1"] + p["L2"]
        p0 = initial_state(src)
        p1 = evolve_pair(p0, L)

        def measure(n, ext):
            g = O.spectral_propagate(O.sample_pair_state(p0, ext, n), L, SCALE.Lambda)
            return O.max_rel_err(g.values, O.sample_pair_state(p1, ext, n).values, 0.9)

        n, ext = _grid2d(2.0 * beam_sigma(src, L), src.lc, base_n)
        r = O.refine(measure, n, ext, tol, max_n=MAX_2D_N, absolute=True, auto=auto)
        out.append(_report(f"evolution[{i}]", 0.0, r, tol, rel_err=r.value,
                           note="max pointwise rel. error, central 90% mass"))

        g0 = O.sample_pair_state(p0, r.extent, r.n)
        g1 = O.spectral_propagate(g0, L, SCALE.Lambda)
        n0 = float(np.sum(np.abs(g0.values) ** 2))
        n1 = float(np.sum(np.abs(g1.values) ** 2))
        out.append(O.OracleReport(f"evolution-norm[{i}]", n0, n1, abs(n1 - n0) / n0, 1e-12,
                                  r.converged, r.n, r.extent))
        half = O.spectral_propagate(O.spectral_propagate(g0, L / 2, SCALE.Lambda), L / 2, SCALE.Lambda)
        comp = float(np.max(np.abs(half.values - g1.values)) / np.max(np.abs(g1.values)))
        out.append(O.OracleReport(f"evolution-composition[{i}]", 0.0, comp, comp, 1e-12,
                                  r.converged, r.n, r.extent))
    return out


def check_conditioning_quad(base_n=None, auto=True) -> List[O.OracleReport]:
    """Closed-form conditioned gamma vs adaptive quadrature over y1 (10 points)."""
    tol = 1e-8
    out = []
    for i, p in enumerate(random_points(10, SEED + 3)):
        src = SourceSpec(p["lc"], p["omega"], SCALE)
        pair = evolve_pair(initial_state(src), p["L1"])
        analytic = condition_on_slit(pair, SlitSpec(p["eps"])).gamma
        g1 = O.quad_conditioned_gamma(pair, p["eps"], probe=0.5)
        g2 = O.quad_conditioned_gamma(pair, p["eps"], probe=0.35)
        converged = _rel(g1, g2) < 0.1 * tol
        out.append(O.OracleReport(f"conditioning-quad[{i}]", analytic, g1, _rel(g1, analytic), tol,
                                  converged, note="adaptive quadrature, probe-offset stability"))
    return out


def check_conditioning_grid(base_n=None, auto=True) -> List[O.OracleReport]:
    """Grid route: spectral evolution, discrete conditioning sum, Gaussian fit."""
    tol = 1e-8
    out = []
    for i, p in enumerate(random_points(2, SEED + 4)):
        src = SourceSpec(p["lc"], p["omega"], SCALE)
        p0 = initial_state(src)
        L1 = p["L1"]
        analytic = condition_on_slit(evolve_pair(p0, L1), SlitSpec(p["eps"])).gamma

        def measure(n, ext):
            g = O.spectral_propagate(O.sample_pair_state(p0, ext, n), L1, SCALE.Lambda)
            phi2 = O.quadrature_condition(g, O.sample_gaussian(p["eps"] ** 2, ext, n))
            return O.fit_gamma(phi2)

        n, ext = _grid2d(2.0 * beam_sigma(src, L1), min(src.lc, p["eps"]), base_n)
        r = O.refine(measure, n, ext, tol, max_n=MAX_2D_N, auto=auto)
        out.append(_report(f"conditioning-grid[{i}]", analytic, r, tol))
    return out


def check_momentum(base_n=None, auto=True) -> List[O.OracleReport]:
    """Closed-form packet moments vs grid moments of a chirped Gaussian."""
    tol = 1e-8
    packet = GaussianPacket(complex(1.0, 2.0) * UNIT ** 2, UNIT ** 2)
    sig = packet_intensity_sigma(packet)
    n, ext = _grid1d(sig, math.sqrt(packet.gamma.real), base_n)
    rp = O.refine(lambda n, e: O.grid_moments(O.sample_gaussian(packet.gamma, e, n))[1], n, ext, tol, auto=auto)
    ry = O.refine(lambda n, e: O.grid_moments(O.sample_gaussian(packet.gamma, e, n))[0], n, ext, tol, auto=auto)
    return [
        _report("momentum-chirped", packet_momentum_sigma(packet), rp, tol),
        _report("position-chirped", sig, ry, tol),
    ]


def check_conditioned_momentum(base_n=None, auto=True) -> List[O.OracleReport]:
    """Momentum spread of the conditioned packet: closed form vs grid, and its bound."""
    tol = 1e-8
    out = []
    for i, p in enumerate(random_points(2, SEED + 5)):
        src = SourceSpec(p["lc"], p["omega"], SCALE)
        p0 = initial_state(src)
        L1 = p["L1"]
        packet = condition_on_slit(evolve_pair(p0, L1), SlitSpec(p["eps"]))

        def measure(n, ext):
            g = O.spectral_propagate(O.sample_pair_state(p0, ext, n), L1, SCALE.Lambda)
            phi2 = O.quadrature_condition(g, O.sample_gaussian(p["eps"] ** 2, ext, n))
            return O.grid_moments(phi2)[1]

        n, ext = _grid2d(2.0 * beam_sigma(src, L1), min(src.lc, p["eps"]), base_n)
        r = O.refine(measure, n, ext, tol, max_n=MAX_2D_N, auto=auto)
        out.append(_report(f"conditioned-momentum[{i}]", packet_momentum_sigma(packet), r, tol))
        bound = initial_momentum_spread(src)
        excess = max(0.0, r.value / bound - 1.0)
        out.append(O.OracleReport(f"momentum-bound[{i}]", bound, r.value, excess, 1e-9, r.converged,
                                  r.n, r.extent, note="conditioned spread must not exceed initial"))
    return out


def check_initial_spreads(base_n=None, auto=True) -> List[O.OracleReport]:
    """Printed initial position and momentum spreads vs grid marginals."""
    tol = 1e-6
    p = random_points(1, SEED + 6)[0]
    src = SourceSpec(p["lc"], p["omega"], SCALE)

    def pos(n, ext):
        return O.marginal_sigma(O.sample_initial_pair(src, ext, n), particle=2)

    def mom(n, ext):
        g = O.sample_initial_pair(src, ext, n)
        spec = np.abs(np.fft.fft2(g.values)) ** 2
        marg = spec.sum(axis=0)
        marg = marg / marg.sum()
        k = g.k
        return math.sqrt(float(np.sum(marg * k ** 2) - np.sum(marg * k) ** 2))

    n, ext = _grid2d(2.0 * initial_position_spread(src), src.lc, base_n)
    rp = O.refine(pos, n, ext, tol, max_n=MAX_2D_N, auto=auto)
    rm = O.refine(mom, n, ext, tol, max_n=MAX_2D_N, auto=auto)
    return [
        _report("initial-position-spread", initial_position_spread(src), rp, tol),
        _report("initial-momentum-spread", initial_momentum_spread(src), rm, tol),
    ]


def check_beam_width(base_n=None, auto=True) -> List[O.OracleReport]:
    """Exact unconditioned beam spread vs marginal of the spectrally evolved pair."""
    tol = 1e-4
    out = []
    for i, p in enumerate(random_points(3, SEED + 7)):
        src = SourceSpec(p["lc"], p["omega"], SCALE)
        L = p["L1"] + p["L2"]
        p0 = initial_state(src)

        def measure(n, ext):
            return O.marginal_sigma(O.spectral_propagate(O.sample_pair_state(p0, ext, n), L, SCALE.Lambda))

        n, ext = _grid2d(2.0 * beam_sigma(src, L), src.lc, base_n)
        r = O.refine(measure, n, ext, tol, max_n=MAX_2D_N, auto=auto)
        out.append(_report(f"beam-width[{i}]", beam_sigma(src, L), r, tol))
    return out


def check_virtual_slit(base_n=None, auto=True) -> List[O.OracleReport]:
    """Detector-plane packet: grid route vs no-lens pipeline; large-omega virtual slit."""
    tol = 1e-8
    out = []
    for i, p in enumerate(random_points(2, SEED + 8)):
        src = SourceSpec(p["lc"], p["omega"], SCALE)
        L1, L2 = p["L1"], p["L2"]
        slit = SlitSpec(p["eps"])
        analytic = run_pipeline(src, [FreeSpace(L1), Slit(slit)],
                                [FreeSpace(L1), FreeSpace(L2), Detector()]).gamma
        p0 = initial_state(src)

        def measure(n, ext):
            g = O.spectral_propagate(O.sample_pair_state(p0, ext, n), L1, SCALE.Lambda)
            phi2 = O.quadrature_condition(g, O.sample_gaussian(p["eps"] ** 2, ext, n))
            return O.fit_gamma(O.spectral_propagate(phi2, L2, SCALE.Lambda))

        sig = max(beam_sigma(src, L1), packet_intensity_sigma(analytic))
        n, ext = _grid2d(2.0 * sig, min(src.lc, p["eps"]), base_n)
        r = O.refine(measure, n, ext, tol, max_n=MAX_2D_N, auto=auto)
        out.append(_report(f"virtual-slit-grid[{i}]", analytic, r, tol))

        wide = SourceSpec(p["lc"], math.inf, SCALE)
        g = run_pipeline(wide, [FreeSpace(L1), Slit(slit)], [FreeSpace(L1), FreeSpace(L2), Detector()]).gamma
        virtual = free_propagate(GaussianPacket(p["eps"] ** 2 + p["lc"] ** 2, 1.0), 2 * L1 + L2, SCALE).gamma
        out.append(O.OracleReport(f"virtual-slit-limit[{i}]", virtual, g, _rel(g, virtual), 1e-12, True))
    return out


def check_ghost_image(base_n=None, auto=True) -> List[O.OracleReport]:
    """Kim-Shih lens geometry: particle 2 at slit B has a purely real parameter."""
    out = []
    for i, (b1, f) in enumerate([(0.5, 0.5), (0.255, 0.5), (0.3, 0.25)]):
        eps, lc = 0.08e-3, 0.2214e-3
        src = SourceSpec(lc, math.inf, SCALE)
        arm1 = [FreeSpace(b1), Lens(f), FreeSpace(2 * f), Slit(SlitSpec(eps))]
        g = run_pipeline(src, arm1, [FreeSpace(2 * f - b1), Detector()]).gamma
        out.append(O.OracleReport(f"ghost-image[{i}]", complex(eps ** 2 + lc ** 2), g,
                                  _rel(g, complex(eps ** 2 + lc ** 2)), 1e-12, True,
                                  note="algebraic: lens defined only on Gaussians"))
    return out


def check_lens_roundtrip(base_n=None, auto=True) -> List[O.OracleReport]:
    """Waist at 2f before the lens is recovered 2f after it."""
    out = []
    for i, (w, f) in enumerate([(0.08e-3, 0.5), (0.2e-3, 0.1), (1e-3, 2.0)]):
        p = free_propagate(GaussianPacket(complex(w * w), w * w), 2 * f, SCALE)
        back = free_propagate(lens_transform(p, f, SCALE), 2 * f, SCALE).gamma
        out.append(O.OracleReport(f"lens-roundtrip[{i}]", complex(w * w), back, _rel(back, complex(w * w)),
                                  1e-12, True, note="algebraic"))
    return out


def check_rect_slit(base_n=None, auto=True) -> List[O.OracleReport]:
    """Hard-aperture conditioning vs Gaussian slit with epsilon = a/2 (envelope FWHM)."""
    tol = 0.15
    out = []
    a = 0.16e-3
    for i, (lc, omega, D) in enumerate([(0.2214e-3, 1e-3, 1.0), (0.04e-3, 1e-3, 1.8)]):
        src = SourceSpec(lc, omega, SCALE)
        p0 = initial_state(src)
        gauss = free_propagate(condition_on_slit(p0, SlitSpec.from_rect(a, 0.5)), D, SCALE)
        analytic = math.sqrt(2.0 * math.log(2.0)) * packet_width(gauss)

        far_extent = 16.0 * SCALE.Lambda * D / min(lc, a)

        def measure(n, ext):
            phi2 = O.rect_slit_condition(O.sample_pair_state(p0, ext, n), a)
            factor = max(16, O.next_pow2(far_extent / ext))
            return O.grid_fwhm(O.spectral_propagate(O.pad(phi2, factor), D, SCALE.Lambda))

        n, ext = _grid2d(2.0 * initial_position_spread(src), min(lc, a), base_n)
        r = O.refine(measure, n, ext, tol, max_n=4096, auto=auto)
        out.append(O.OracleReport(f"rect-slit[{i}]", analytic, r.value, _rel(analytic, r.value), tol,
                                  r.converged, r.n, r.extent,
                                  note="envelope FWHM of the far-field pattern"))
    return out


SUITE: Dict[str, Callable[..., List[O.OracleReport]]] = {
    "initial-state": check_initial_state,
    "evolution": check_evolution,
    "conditioning-quad": check_conditioning_quad,
    "conditioning-grid": check_conditioning_grid,
    "momentum": check_momentum,
    "conditioned-momentum": check_conditioned_momentum,
    "initial-spreads": check_initial_spreads,
    "beam-width": check_beam_width,
    "virtual-slit": check_virtual_slit,
    "ghost-image": check_ghost_image,
    "lens-roundtrip": check_lens_roundtrip,
    "rect-slit": check_rect_slit,
}


def run_suite(names: Optional[Iterable[str]] = None, base_n: Optional[int] = None,
              auto: bool = True, jobs: int = 1) -> List[O.OracleReport]:
    """Run the selected checks; results come back in suite order regardless of ``jobs``."""
    names = list(SUITE) if not names else list(names)
    unknown = [n for n in names if n not in SUITE]
    if unknown:
        raise KeyError(f"unknown oracle check(s): {', '.join(unknown)}")

    def one(name):
        try:
            return SUITE[name](base_n=base_n, auto=auto)
        except O.OracleError as exc:
            return [O.OracleReport(name, math.nan, math.nan, math.inf, 0.0, False, note=str(exc))]

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(one, names))
    else:
        batches = [one(n) for n in names]
    return [r for batch in batches for r in batch]
