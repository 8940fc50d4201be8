"""Scalar conventions, the complex Gaussian parameter and wavelength kinematics.

All lengths are SI meters and areas are m^2. A single-particle amplitude is
always written ``exp(-y**2 / gamma)``; every width quoted anywhere in the
package is derived from that form explicitly.

Momenta are reported in units of hbar, i.e. as inverse lengths. Photon-mode
calculations never need an absolute value of hbar.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import constants

from .errors import InvalidModeError, InvalidPacketError, PhysicsDomainError

HBAR = constants.hbar
PLANCK = constants.h

Length = float
Area = float
ComplexArea = complex


def require_nonnegative(name: str, value: float) -> float:
    if not value >= 0:
        raise PhysicsDomainError(f"{name} must be >= 0, got {value!r}")
    return value


def require_positive(name: str, value: float) -> float:
    if not value > 0:
        raise PhysicsDomainError(f"{name} must be > 0, got {value!r}")
    return value


def reduced_wavelength(wavelength: Length) -> Length:
    """Return lambda / pi, the length that multiplies distance in gamma updates."""
    return wavelength / math.pi


@dataclass(frozen=True)
class DiffractionScale:
    """Wavelength of the particles plus, for massive particles, mass and speed.

    Free evolution over a time ``t`` adds ``2j*hbar*t/m`` to a Gaussian
    parameter. Writing that as ``1j*Lambda*L`` with ``Lambda = lambda/pi``
    lets photons and massive particles share one distance-based code path.
    """

    wavelength: Length
    mass: Optional[float] = None
    speed: Optional[float] = None

    def __post_init__(self):
        require_positive("wavelength", self.wavelength)
        if (self.mass is None) != (self.speed is None):
            raise InvalidModeError("massive mode needs both mass and speed")
        if self.mass is not None:
            require_positive("mass", self.mass)
            require_positive("speed", self.speed)

    @classmethod
    def photon(cls, wavelength: Length) -> "DiffractionScale":
        return cls(wavelength)

    @classmethod
    def massive(cls, mass: float, speed: float) -> "DiffractionScale":
        """de Broglie wavelength h / (m v) of a particle with given mass and speed."""
        require_positive("mass", mass)
        require_positive("speed", speed)
        return cls(PLANCK / (mass * speed), mass, speed)

    @property
    def mode(self) -> str:
        return "photon" if self.mass is None else "massive"

    @property
    def Lambda(self) -> Length:
        return reduced_wavelength(self.wavelength)


def time_to_distance(t: float, scale: DiffractionScale) -> Length:
    """Distance ``L`` with ``2*hbar*t/m == Lambda*L`` (equals ``v*t``)."""
    if scale.mode != "massive":
        raise InvalidModeError("time_to_distance requires a massive-particle scale")
    require_nonnegative("t", t)
    return 2.0 * HBAR * t / (scale.mass * scale.Lambda)


def _check_gamma(gamma: complex) -> complex:
    gamma = complex(gamma)
    if not (gamma.real > 0 and math.isfinite(gamma.real) and math.isfinite(gamma.imag)):
        raise InvalidPacketError(f"Gaussian parameter needs finite positive real part, got {gamma!r}")
    return gamma


@dataclass(frozen=True)
class GaussianPacket:
    """Single-particle state ``exp(-y**2 / gamma)``.

    ``waist_hint`` is the real parameter the packet had at its last waist
    (focus or origin). The lens model needs it to pick between the two
    waists compatible with a given beam width.

    ``conditioned`` is False only for the wide-open-slit limit, where no
    localisation of the partner took place.
    """

    gamma: ComplexArea
    waist_hint: Area
    normalized: bool = True
    conditioned: bool = True

    def __post_init__(self):
        object.__setattr__(self, "gamma", _check_gamma(self.gamma))
        require_positive("waist_hint", self.waist_hint)

    def amplitude(self, y):
        y = np.asarray(y, dtype=float)
        psi = np.exp(-(y ** 2) / self.gamma)
        if self.normalized:
            g = self.gamma
            psi = psi * (2.0 * g.real / (math.pi * abs(g) ** 2)) ** 0.25
        return psi

    def intensity(self, y):
        return np.abs(self.amplitude(y)) ** 2


PacketLike = Union[GaussianPacket, complex]


def _gamma_of(p: PacketLike) -> complex:
    return _check_gamma(p.gamma if isinstance(p, GaussianPacket) else p)


def packet_intensity_sigma(p: PacketLike) -> Length:
    """Standard deviation of ``|psi|**2``: ``sqrt(|gamma|**2 / (4 Re gamma))``."""
    g = _gamma_of(p)
    return math.sqrt(abs(g) ** 2 / (4.0 * g.real))


def packet_width(p: PacketLike) -> Length:
    """1/e^2 intensity half-width, twice :func:`packet_intensity_sigma`."""
    return 2.0 * packet_intensity_sigma(p)


def packet_momentum_sigma(p: PacketLike) -> float:
    """Momentum spread in units of hbar (1/m).

    The Fourier transform of ``exp(-y**2/gamma)`` is ``exp(-k**2 gamma/4)``,
    so only ``Re gamma`` enters: ``dk = 1/sqrt(Re gamma)``.
    """
    g = _gamma_of(p)
    return 1.0 / math.sqrt(g.real)
