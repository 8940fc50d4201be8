"""Command implementations behind the CLI: pure functions returning report objects,
plus their CSV and summary-table renderings."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import validation
from .config import Scenario, scenario_hash
from .errors import PhysicsDomainError
from .optics import DEFAULT_SLIT_CONVERSION, arm_length, run_pipeline
from .oracle import OracleReport
from .patterns import (
    EXACT_FWHM_FACTOR,
    LN2,
    PAPER,
    Curve,
    PatternStats,
    WidthConvention,
    detector_convolution,
    fit_correlation_length,
    fmt,
    invert_width,
    packet_pattern,
    pattern_width,
    select_root,
    width_vs_slit_sweep,
    write_curve_csv,
)
from .quantities import packet_momentum_sigma, packet_width
from .source import SourceSpec, beam_width, initial_momentum_spread

_TOL = 1e-12


def _writer(stream: IO[str]):
    return csv.writer(stream, lineterminator="\n")


def _mm(v: float) -> str:
    return fmt(v * 1e3)


def _mm2(v: float) -> str:
    return fmt(v * 1e6)


def _flag(ok: bool) -> str:
    return "pass" if ok else "fail"


def effective_distance(s: Scenario) -> float:
    """Distance past the waist at the detector, read from the large-omega pipeline.

    With an infinitely wide centre-of-mass spread the conditioned packet is
    ``x + 1j*Lambda*D`` exactly, so ``D`` follows from the imaginary part
    regardless of lenses in arm 1.
    """
    if s.slit.is_open:
        raise PhysicsDomainError("slit A is wide open; there is no conditioned pattern to analyse")
    wide = SourceSpec(s.source.lc, math.inf, s.source.scale)
    p = run_pipeline(wide, s.arm1, s.arm2)
    return abs(p.gamma.imag) / s.source.scale.Lambda


def _conversion(s: Scenario) -> float:
    return s.slit.conversion if s.slit.conversion is not None else DEFAULT_SLIT_CONVERSION


# ---------------------------------------------------------------- simulate

@dataclass(frozen=True)
class SimulationReport:
    scenario: Scenario
    gamma: complex
    conditioned: bool
    stats: PatternStats
    beam_width: float
    momentum_sigma: float
    initial_momentum_sigma: float
    invariants: Tuple[Tuple[str, bool], ...]

    @property
    def ok(self) -> bool:
        return all(v for _, v in self.invariants)


def cmd_simulate(s: Scenario, conv: WidthConvention = PAPER) -> SimulationReport:
    src = s.source
    packet = run_pipeline(src, s.arm1, s.arm2)
    L2 = arm_length(s.arm2)
    bw = beam_width(src, L2)
    p0 = initial_momentum_spread(src)
    if packet.conditioned:
        stats = packet_pattern(packet, src.scale.Lambda, conv)
        mom = packet_momentum_sigma(packet)
        width = packet_width(packet)
    else:
        # no conditioning: particle 2 is in its marginal (mixed) state
        x0 = src.omega2 + src.lc2 / 4.0
        stats = PatternStats(x0, L2, bw, LN2 * bw, EXACT_FWHM_FACTOR * bw, conv)
        mom = p0
        width = bw
    invariants = (
        ("gamma_re_positive", packet.gamma.real > 0),
        ("momentum_le_initial", mom <= p0 * (1.0 + _TOL)),
        ("pattern_le_beam", width <= bw * (1.0 + _TOL)),
    )
    return SimulationReport(s, packet.gamma, packet.conditioned, stats, bw, mom, p0, invariants)


SIM_COLUMNS = (
    "scenario", "config_sha256", "conditioned",
    "gamma_re_mm2", "gamma_im_mm2", "x_mm2", "distance_m",
    "width_W_mm", "fwhm_paper_mm", "fwhm_exact_mm", "beam_width_mm",
    "momentum_sigma_hbar_per_mm", "initial_momentum_sigma_hbar_per_mm",
    "gamma_re_positive", "momentum_le_initial", "pattern_le_beam",
)


def write_simulation_csv(r: SimulationReport, stream: IO[str]) -> None:
    st = r.stats
    w = _writer(stream)
    w.writerow(SIM_COLUMNS)
    w.writerow([
        r.scenario.name, scenario_hash(r.scenario), "yes" if r.conditioned else "no",
        _mm2(r.gamma.real), _mm2(r.gamma.imag), _mm2(st.x), fmt(st.D),
        _mm(st.W), _mm(st.fwhm_paper), _mm(st.fwhm_exact), _mm(r.beam_width),
        fmt(r.momentum_sigma * 1e-3), fmt(r.initial_momentum_sigma * 1e-3),
        *(_flag(v) for _, v in r.invariants),
    ])


def simulation_table(r: SimulationReport) -> str:
    st = r.stats
    rows = [
        ("scenario", r.scenario.name or "(unnamed)"),
        ("conditioned", "yes" if r.conditioned else "no (slit A wide open)"),
        ("Gamma [mm^2]", f"{r.gamma.real * 1e6:.6g} {r.gamma.imag * 1e6:+.6g}i"),
        ("distance past waist [m]", f"{st.D:.6g}"),
        (f"width W (c={st.convention.c:g}) [mm]", f"{st.W * 1e3:.6g}"),
        ("FWHM paper [mm]", f"{st.fwhm_paper * 1e3:.6g}"),
        ("FWHM exact [mm]", f"{st.fwhm_exact * 1e3:.6g}"),
        ("beam width [mm]", f"{r.beam_width * 1e3:.6g}"),
    ]
    rows += [(f"invariant {k}", _flag(v)) for k, v in r.invariants]
    return _table(rows)


# ---------------------------------------------------------------- fit

@dataclass(frozen=True)
class FitReport:
    D: float
    fwhm_obs: float
    roots: Tuple[float, float]
    root_choice: str
    x: float
    epsilon: float
    lc2: float
    residual: float
    convention: WidthConvention

    @property
    def double_root(self) -> bool:
        return math.isclose(self.roots[0], self.roots[1], rel_tol=1e-6)


def cmd_fit(s: Scenario, fwhm_obs: float, conv: WidthConvention = PAPER,
            root: str = "auto") -> FitReport:
    """Invert an observed FWHM (SI) into the waist parameter and ``lc**2``."""
    if root not in ("auto", "small", "large"):
        raise ValueError(f"root must be auto, small or large, got {root!r}")
    D = effective_distance(s)
    Lambda = s.source.scale.Lambda
    small, large = invert_width(fwhm_obs, D, Lambda, conv)
    eps = s.slit.epsilon
    if root == "auto":
        x = select_root((small, large), eps)
    else:
        x = small if root == "small" else large
    lc2 = fit_correlation_length(x, eps)
    fwhm_back = pattern_width(x, D, Lambda, conv).fwhm_paper
    return FitReport(D, fwhm_obs, (small, large), root, x, eps, lc2, fwhm_back - fwhm_obs, conv)


FIT_COLUMNS = (
    "distance_m", "fwhm_obs_mm", "x_small_mm2", "x_large_mm2", "root", "x_selected_mm2",
    "sqrt_x_mm", "epsilon_mm", "lc2_mm2", "lc_mm", "residual_mm", "convention_c",
)


def write_fit_csv(r: FitReport, stream: IO[str]) -> None:
    w = _writer(stream)
    w.writerow(FIT_COLUMNS)
    w.writerow([
        fmt(r.D), _mm(r.fwhm_obs), _mm2(r.roots[0]), _mm2(r.roots[1]), r.root_choice,
        _mm2(r.x), _mm(math.sqrt(r.x)), _mm(r.epsilon), _mm2(r.lc2), _mm(math.sqrt(r.lc2)),
        _mm(r.residual), fmt(r.convention.c),
    ])


def fit_table(r: FitReport) -> str:
    rows = [
        ("distance past waist [m]", f"{r.D:.6g}"),
        ("observed FWHM [mm]", f"{r.fwhm_obs * 1e3:.6g}"),
        ("roots sqrt(x) [mm]", f"{math.sqrt(r.roots[0]) * 1e3:.6g}, {math.sqrt(r.roots[1]) * 1e3:.6g}"
         + ("  (double root)" if r.double_root else "")),
        (f"selected ({r.root_choice}) sqrt(x) [mm]", f"{math.sqrt(r.x) * 1e3:.6g}"),
        ("epsilon [mm]", f"{r.epsilon * 1e3:.6g}"),
        ("lc^2 [mm^2]", f"{r.lc2 * 1e6:.6g}"),
        ("residual [mm]", f"{r.residual * 1e3:.3g}"),
    ]
    return _table(rows)


# ---------------------------------------------------------------- sweep

def parse_widths(text: str) -> List[float]:
    """``"0.05,0.1,0.2"`` or ``"start:stop:count"`` (inclusive), in mm; returns meters."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            count = int(count)
            if count < 2:
                raise ValueError("a range needs at least 2 points")
            values = np.linspace(float(start), float(stop), count).tolist()
        else:
            values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ValueError(f"bad width list {text!r}: {exc}") from exc
    if not values:
        raise ValueError("empty width list")
    return [v * 1e-3 for v in values]


def cmd_sweep(s: Scenario, widths: Sequence[float], detector_width: Optional[float] = None,
              conv: WidthConvention = PAPER, jobs: int = 1) -> Curve:
    """Pattern FWHM against slit-A full width; ``detector_width`` defaults to the scenario's."""
    D = effective_distance(s)
    lc = s.source.lc
    conversion = _conversion(s)
    det = s.detector_width if detector_width is None else detector_width
    widths = list(widths)

    def chunk(ws):
        c = width_vs_slit_sweep(lc, D, s.wavelength, ws, conv, conversion)
        return detector_convolution(c, det) if det else c

    if jobs > 1 and len(widths) > 1:
        size = math.ceil(len(widths) / jobs)
        parts = [widths[i:i + size] for i in range(0, len(widths), size)]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            curves = list(pool.map(chunk, parts))
        return Curve(*(np.concatenate([getattr(c, f) for c in curves])
                       for f in ("slit_full_width", "fwhm_paper", "fwhm_exact", "x")))
    return chunk(widths)


def write_sweep_csv(curve: Curve, stream: IO[str]) -> None:
    write_curve_csv(curve, stream)


def sweep_table(curve: Curve) -> str:
    i = int(np.argmin(curve.fwhm_paper))
    rows = [
        ("points", str(len(curve))),
        ("slit range [mm]", f"{curve.slit_full_width.min() * 1e3:.6g} .. {curve.slit_full_width.max() * 1e3:.6g}"),
        ("min FWHM paper [mm]", f"{curve.fwhm_paper[i] * 1e3:.6g} at slit {curve.slit_full_width[i] * 1e3:.6g} mm"),
    ]
    return _table(rows)


# ---------------------------------------------------------------- oracle

def cmd_oracle(names: Optional[Iterable[str]] = None, grid_n: Optional[int] = None,
               refine: bool = True, jobs: int = 1, fail_fast: bool = False) -> List[OracleReport]:
    names = list(names) if names else list(validation.SUITE)
    if not fail_fast:
        return validation.run_suite(names, grid_n, refine, jobs)
    out: List[OracleReport] = []
    for name in names:
        batch = validation.run_suite([name], grid_n, refine, 1)
        out.extend(batch)
        if not all(r.passed for r in batch):
            break
    return out


ORACLE_COLUMNS = ("quantity", "analytic", "numeric", "rel_err", "tolerance", "converged",
                  "passed", "grid_n", "extent_m", "note")


def _num(v) -> str:
    if isinstance(v, complex):
        return f"{fmt(v.real)}{'+' if v.imag >= 0 else '-'}{fmt(abs(v.imag))}j"
    return fmt(v)


def write_oracle_csv(reports: Sequence[OracleReport], stream: IO[str]) -> None:
    w = _writer(stream)
    w.writerow(ORACLE_COLUMNS)
    for r in reports:
        w.writerow([r.quantity, _num(r.analytic), _num(r.numeric), fmt(r.rel_err), fmt(r.tolerance),
                    "yes" if r.converged else "no", _flag(r.passed), r.n, fmt(r.extent), r.note])


def oracle_table(reports: Sequence[OracleReport]) -> str:
    rows = []
    for r in reports:
        status = "PASS" if r.passed else ("UNCONVERGED" if not r.converged else "FAIL")
        rows.append((r.quantity, f"{status:11s} rel_err={r.rel_err:.3e} tol={r.tolerance:.1e} n={r.n}"))
    passed = sum(r.passed for r in reports)
    rows.append(("total", f"{passed}/{len(reports)} passed"))
    return _table(rows)


def _table(rows: Sequence[Tuple[str, str]]) -> str:
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)
