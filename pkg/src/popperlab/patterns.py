"""Pattern widths, their inversion, correlation-length fits and slit sweeps.

A packet ``x + 1j*Lambda*D`` (waist parameter ``x``, distance ``D`` past
the waist) has intensity ``exp(-2 y**2 / W**2)`` with

    W**2 = x + Lambda**2 D**2 / x.

The "paper" convention is ``W**2 = x + c Lambda**2 D**2 / x`` with
``FWHM = ln2 * W``. The constant ``c`` is pinned to 1, which is what the
Gaussian algebra gives and the only value for which inverting 0.657 mm at
2 m and 702 nm has a solution at all. The profile FWHM
``sqrt(2 ln2) * W`` is always reported next to it.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import IO, Iterable, Sequence, Tuple

import numpy as np

from .errors import CalibrationError, DiffractionLimitError, PhysicsDomainError
from .optics import DEFAULT_SLIT_CONVERSION
from .quantities import GaussianPacket, reduced_wavelength, require_nonnegative, require_positive

LN2 = math.log(2.0)
EXACT_FWHM_FACTOR = math.sqrt(2.0 * LN2)
PINNED_C = 1.0


@dataclass(frozen=True)
class WidthConvention:
    kind: str = "paper"
    c: float = PINNED_C

    def __post_init__(self):
        if self.kind not in ("paper", "exact"):
            raise ValueError(f"unknown width convention {self.kind!r}")
        if self.c not in (1.0, 4.0):
            raise ValueError(f"convention constant must be 1 or 4, got {self.c!r}")
        if self.kind == "exact" and self.c != 1.0:
            raise ValueError("the exact convention has no free constant")

    @property
    def fwhm_factor(self) -> float:
        """FWHM / W under this convention."""
        return LN2 if self.kind == "paper" else EXACT_FWHM_FACTOR


PAPER = WidthConvention("paper", PINNED_C)
PRINTED = WidthConvention("paper", 4.0)
EXACT = WidthConvention("exact", 1.0)


@dataclass(frozen=True)
class PatternStats:
    x: float
    D: float
    W: float
    fwhm_paper: float
    fwhm_exact: float
    convention: WidthConvention = PAPER


def pattern_width(x: float, D: float, Lambda: float,
                  conv: WidthConvention = PAPER) -> PatternStats:
    require_positive("x", x)
    require_nonnegative("D", D)
    diff2 = (Lambda * D) ** 2 / x
    w = math.sqrt(x + conv.c * diff2)
    w_true = math.sqrt(x + diff2)
    return PatternStats(x, D, w, LN2 * w, EXACT_FWHM_FACTOR * w_true, conv)


def packet_pattern(p: GaussianPacket, Lambda: float, conv: WidthConvention = PAPER) -> PatternStats:
    """Pattern statistics of a packet, reading off its waist and distance."""
    return pattern_width(p.gamma.real, abs(p.gamma.imag) / Lambda, Lambda, conv)


def invert_width(fwhm_obs: float, D: float, Lambda: float,
                 conv: WidthConvention = PAPER) -> Tuple[float, float]:
    """Both waist parameters ``x`` giving ``fwhm_obs`` after distance ``D``.

    Roots of ``x**2 - W**2 x + c Lambda**2 D**2 = 0``, returned as
    ``(small, large)``.
    """
    require_positive("fwhm_obs", fwhm_obs)
    require_nonnegative("D", D)
    w2 = (fwhm_obs / conv.fwhm_factor) ** 2
    q = conv.c * (Lambda * D) ** 2
    disc = w2 * w2 - 4.0 * q
    if -1e-12 * w2 * w2 < disc < 0:
        disc = 0.0  # rounding at the double root
    if disc < 0:
        fwhm_min = conv.fwhm_factor * math.sqrt(2.0 * math.sqrt(q))
        raise DiffractionLimitError(
            f"observed FWHM {fwhm_obs:.6e} m is narrower than the diffraction limit "
            f"{fwhm_min:.6e} m for D={D:.6e} m (c={conv.c:g})"
        )
    large = 0.5 * (w2 + math.sqrt(disc))
    small = q / large
    return small, large


def select_root(roots: Sequence[float], epsilon: float) -> float:
    """Smallest root compatible with a slit of parameter ``epsilon`` (x >= eps^2)."""
    e2 = epsilon ** 2
    ok = [r for r in sorted(roots) if r >= e2 * (1.0 - 1e-12)]
    if not ok:
        raise CalibrationError(
            f"no root exceeds epsilon^2={e2:.6e} m^2 (roots {sorted(roots)!r})"
        )
    return ok[0]


def fit_correlation_length(x: float, epsilon: float) -> float:
    """Squared correlation length ``lc**2 = x - epsilon**2``."""
    lc2 = x - epsilon ** 2
    if lc2 < 0:
        if lc2 > -1e-12 * x:
            return 0.0
        raise CalibrationError(
            f"x={x:.6e} m^2 is below epsilon^2={epsilon ** 2:.6e} m^2; slit calibration inconsistent"
        )
    return lc2


@dataclass(frozen=True)
class Curve:
    """Pattern FWHM against the full width of slit A (all SI)."""

    slit_full_width: np.ndarray
    fwhm_paper: np.ndarray
    fwhm_exact: np.ndarray
    x: np.ndarray

    def __len__(self):
        return len(self.slit_full_width)


def width_vs_slit_sweep(lc: float, D: float, wavelength: float,
                        slit_full_widths: Iterable[float],
                        conv: WidthConvention = PAPER,
                        conversion: float = DEFAULT_SLIT_CONVERSION) -> Curve:
    require_nonnegative("lc", lc)
    require_nonnegative("D", D)
    require_positive("conversion", conversion)
    a = np.asarray(list(slit_full_widths), dtype=float)
    if np.any(a <= 0):
        raise PhysicsDomainError("slit widths must be positive")
    lam = reduced_wavelength(wavelength)
    x = (conversion * a) ** 2 + lc ** 2
    diff2 = (lam * D) ** 2 / x
    fwhm_paper = LN2 * np.sqrt(x + conv.c * diff2)
    fwhm_exact = EXACT_FWHM_FACTOR * np.sqrt(x + diff2)
    return Curve(a, fwhm_paper, fwhm_exact, x)


def sweep_minimum(lc: float, D: float, wavelength: float,
                  conv: WidthConvention = PAPER,
                  conversion: float = DEFAULT_SLIT_CONVERSION) -> float:
    """Slit full width minimising the paper-convention FWHM.

    The width is smallest at ``x = sqrt(c) Lambda D``; when the source alone
    already exceeds that (``lc**2 >= sqrt(c) Lambda D``) the curve only rises
    and there is no interior minimum.
    """
    x_star = math.sqrt(conv.c) * reduced_wavelength(wavelength) * D
    e2 = x_star - lc ** 2
    if e2 <= 0:
        raise PhysicsDomainError("no interior minimum: correlation length beyond the diffraction optimum")
    return math.sqrt(e2) / conversion


def detector_convolution(curve: Curve, detector_width: float, k: float = 1.0) -> Curve:
    """Add a detector of the given width in quadrature to both FWHM columns."""
    require_nonnegative("detector_width", detector_width)
    extra = (k * detector_width) ** 2
    return replace(
        curve,
        fwhm_paper=np.sqrt(curve.fwhm_paper ** 2 + extra),
        fwhm_exact=np.sqrt(curve.fwhm_exact ** 2 + extra),
    )


CURVE_COLUMNS = ("slit_full_width_mm", "fwhm_paper_mm", "fwhm_exact_mm", "x_mm2")


def fmt(v: float) -> str:
    return f"{v:.11e}"


def write_curve_csv(curve: Curve, stream: IO[str]) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CURVE_COLUMNS)
    for a, fp, fe, x in zip(curve.slit_full_width, curve.fwhm_paper, curve.fwhm_exact, curve.x):
        w.writerow([fmt(a * 1e3), fmt(fp * 1e3), fmt(fe * 1e3), fmt(x * 1e6)])
