"""Two-particle entangled Gaussian source and its free evolution.

The source amplitude is

    exp(-(y1 - y2)**2 / lc**2) * exp(-(y1 + y2)**2 / (4 * omega**2))

where ``lc = hbar/sigma`` is the correlation length (0 for a perfect EPR
pair) and ``omega`` the centre-of-mass spread. In relative/centre-of-mass
coordinates the state separates, so free evolution of both particles over a
distance ``L`` only adds imaginary parts to the two denominators:

    d_rel = lc**2 + 2j*Lambda*L         (reduced mass m/2)
    d_com = omega**2 + 0.5j*Lambda*L    (total mass 2m)

``omega`` may be ``math.inf`` (no centre-of-mass confinement); such states
cannot be normalised and are sampled unnormalised.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PhysicsDomainError
from .quantities import DiffractionScale, Length, require_nonnegative, require_positive


def _inv(z: complex) -> complex:
    """1/z with 1/inf -> 0, for denominators that carry an infinite omega."""
    z = complex(z)
    if math.isinf(z.real):
        return 0j
    return 1.0 / z


@dataclass(frozen=True)
class SourceSpec:
    lc: Length
    omega: Length
    scale: DiffractionScale

    def __post_init__(self):
        require_positive("lc", self.lc)
        require_positive("omega", self.omega)

    @property
    def lc2(self) -> float:
        return self.lc ** 2

    @property
    def omega2(self) -> float:
        return self.omega ** 2


@dataclass(frozen=True)
class PairState:
    """Entangled pair after both particles travelled ``distance``."""

    d_rel: complex
    d_com: complex
    distance: Length
    scale: DiffractionScale

    @property
    def lc2(self) -> float:
        return self.d_rel.real

    @property
    def omega2(self) -> float:
        return self.d_com.real

    def amplitude(self, y1, y2, normalized: bool = True):
        """Sample the pair amplitude on broadcastable ``y1``, ``y2`` arrays.

        With ``normalized`` the prefactor carries the exact phase acquired
        during free evolution, so samples can be compared pointwise with a
        numerically propagated state.
        """
        y1 = np.asarray(y1, dtype=float)
        y2 = np.asarray(y2, dtype=float)
        psi = np.exp(-((y1 - y2) ** 2) / self.d_rel - (y1 + y2) ** 2 * (0.25 * _inv(self.d_com)))
        if not normalized:
            return psi
        if math.isinf(self.omega2):
            raise PhysicsDomainError("a source with infinite omega cannot be normalised")
        # |psi0|^2 integrates to sqrt(pi lc^2/2) sqrt(pi omega^2/2); du dv = dy1 dy2.
        norm0 = (math.pi * self.lc2 / 2.0) ** -0.25 * (math.pi * self.omega2 / 2.0) ** -0.25
        # each factor has phase in (-pi/4, 0], so principal roots stay continuous
        phase = np.sqrt(self.lc2 / self.d_rel) * np.sqrt(self.omega2 / self.d_com)
        return norm0 * phase * psi


def initial_state(src: SourceSpec) -> PairState:
    return PairState(complex(src.lc2), complex(src.omega2), 0.0, src.scale)


def evolve_pair(s: PairState, L: Length) -> PairState:
    require_nonnegative("L", L)
    lam = s.scale.Lambda
    return PairState(
        s.d_rel + 2j * lam * L,
        s.d_com + 0.5j * lam * L,
        s.distance + L,
        s.scale,
    )


def initial_momentum_spread(src: SourceSpec) -> float:
    """sqrt(sigma**2 + hbar**2/(4 omega**2)) in units of hbar."""
    return math.sqrt(1.0 / src.lc2 + 0.25 / src.omega2)


def initial_position_spread(src: SourceSpec) -> Length:
    """0.5 * sqrt(omega**2 + lc**2/4)."""
    return 0.5 * math.sqrt(src.omega2 + src.lc2 / 4.0)


def beam_sigma(src: SourceSpec, L: Length) -> Length:
    """Exact standard deviation of particle 2's marginal density after ``L``.

    y2 = v - u/2 with u, v independent, so the variance is
    Var(v) + Var(u)/4 using the evolved relative and centre-of-mass widths.
    """
    require_nonnegative("L", L)
    lam_l2 = (src.scale.Lambda * L) ** 2
    var = (
        src.omega2 / 4.0
        + lam_l2 / (16.0 * src.omega2)
        + src.lc2 / 16.0
        + lam_l2 / (4.0 * src.lc2)
    )
    return math.sqrt(var)


def beam_width(src: SourceSpec, L: Length) -> Length:
    """Unconditioned beam width of particle 2 (1/e^2 convention, 2 x sigma)."""
    return 2.0 * beam_sigma(src, L)


def beam_width_printed(src: SourceSpec, L: Length) -> Length:
    """Commonly quoted closed form for the beam width.

    Its centre-of-mass spreading term is ``Lambda**2 L**2 / omega**2``; the
    exact marginal has a quarter of that, so this is an upper bound on
    :func:`beam_width` and coincides with it when ``omega`` is large.
    """
    require_nonnegative("L", L)
    lam_l2 = (src.scale.Lambda * L) ** 2
    return math.sqrt(src.omega2 + lam_l2 / src.omega2 + src.lc2 / 4.0 + lam_l2 / src.lc2)
