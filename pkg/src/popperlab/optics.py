"""Slits, conditioning, free flight, the Gaussian lens map and arm pipelines.

Conditioning on particle 1 uses the identity

    int phi1*(y1) [U1 U2 psi0](y1, y2) dy1 = U2 int (U1^T phi1*)(y1) psi0(y1, y2) dy1

The transposed arm-1 propagator applied to the (real) slit state is the slit
packet carried back to the source through arm 1 with every element acting
forward: free flight is symmetric and the lens is taken to be symmetric too.
The packet reached at the source is then contracted with the source
amplitude in closed form and particle 2 is propagated through its own arm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .errors import NoRealWaistError, PhysicsDomainError, PipelineError
from .quantities import (
    DiffractionScale,
    GaussianPacket,
    Length,
    require_nonnegative,
    require_positive,
)
from .source import PairState, SourceSpec

DEFAULT_SLIT_CONVERSION = 0.5


@dataclass(frozen=True)
class SlitSpec:
    """Gaussian slit ``exp(-y**2/epsilon**2)``, optionally tied to a real slit.

    ``epsilon == math.inf`` is a wide-open slit (no conditioning).
    """

    epsilon: Length
    rect_full_width: Optional[Length] = None
    conversion: Optional[float] = None

    def __post_init__(self):
        require_positive("epsilon", self.epsilon)
        if (self.rect_full_width is None) != (self.conversion is None):
            raise PhysicsDomainError("rect_full_width and conversion go together")
        if self.rect_full_width is not None:
            require_positive("rect_full_width", self.rect_full_width)
            require_positive("conversion", self.conversion)
            expected = self.conversion * self.rect_full_width
            if not math.isclose(self.epsilon, expected, rel_tol=1e-12):
                raise PhysicsDomainError(
                    f"epsilon {self.epsilon!r} != conversion * rect_full_width {expected!r}"
                )

    @classmethod
    def from_rect(cls, full_width: Length, conversion: float = DEFAULT_SLIT_CONVERSION) -> "SlitSpec":
        return cls(conversion * full_width, full_width, conversion)

    @property
    def is_open(self) -> bool:
        return math.isinf(self.epsilon)


@dataclass(frozen=True)
class FreeSpace:
    length: Length

    def __post_init__(self):
        require_nonnegative("free-space length", self.length)


@dataclass(frozen=True)
class Lens:
    focal_length: Length

    def __post_init__(self):
        require_positive("focal length", self.focal_length)


@dataclass(frozen=True)
class Slit:
    spec: SlitSpec


@dataclass(frozen=True)
class Detector:
    pass


OpticalElement = Union[FreeSpace, Lens, Slit, Detector]


def slit_packet(s: SlitSpec) -> GaussianPacket:
    if s.is_open:
        raise PhysicsDomainError("a wide-open slit has no normalisable packet")
    e2 = s.epsilon ** 2
    return GaussianPacket(complex(e2), e2)


def condition_source(gamma_eff: complex, lc2: float, omega2: float) -> complex:
    """Particle-2 parameter at the source, given particle 1's packet there.

    ``gamma_eff`` is particle 1's slit packet referred back to the source
    plane. Written in the same arrangement as the closed-form conditioning
    result; ``omega2`` may be infinite, giving ``gamma_eff + lc2``.
    """
    lc_term = lc2 / (1.0 + lc2 / (4.0 * omega2))
    return (gamma_eff + lc_term) / (1.0 + gamma_eff / (omega2 + lc2 / 4.0))


def _open_slit_limit(lc2: float, omega2: float) -> complex:
    # gamma_eff -> inf: particle 1 projected onto zero transverse momentum
    if math.isinf(omega2):
        raise PhysicsDomainError("wide-open slit with infinite omega leaves particle 2 unlocalised")
    return complex(omega2 + lc2 / 4.0)


def condition_on_slit(pair: PairState, slit: SlitSpec) -> GaussianPacket:
    """Particle 2's packet once particle 1 is found in ``slit``.

    ``pair`` has evolved to the slit plane; both particles have then
    travelled ``pair.distance``.
    """
    lam_l1 = pair.scale.Lambda * pair.distance
    lc2 = pair.lc2
    omega2 = pair.omega2
    if slit.is_open:
        return GaussianPacket(_open_slit_limit(lc2, omega2) + 1j * lam_l1, omega2 + lc2 / 4.0,
                              conditioned=False)
    e2 = slit.epsilon ** 2
    gamma = condition_source(e2 + 1j * lam_l1, lc2, omega2) + 1j * lam_l1
    assert gamma.real > 0
    return GaussianPacket(gamma, e2 + lc2)


def free_propagate(p: GaussianPacket, L: Length, scale: DiffractionScale) -> GaussianPacket:
    require_nonnegative("L", L)
    return GaussianPacket(p.gamma + 1j * scale.Lambda * L, p.waist_hint, p.normalized, p.conditioned)


def lens_transform(p: GaussianPacket, f: Length, scale: DiffractionScale,
                   root: str = "near") -> GaussianPacket:
    """Width-preserving lens map on a packet at distance ``L`` past its waist.

    ``sigma0**2 + 1j*Lambda*L`` becomes ``s2 + 1j*Lambda*(L - 4f)`` where
    ``s2 + Lambda**2 (L-4f)**2 / s2`` equals the incoming width squared. Of
    the two roots, ``root="near"`` takes the one closest to the incoming
    waist and ``root="far"`` the other.
    """
    require_positive("f", f)
    if root not in ("near", "far"):
        raise ValueError(f"root must be 'near' or 'far', got {root!r}")
    lam = scale.Lambda
    s0 = p.waist_hint
    g = p.gamma
    if not math.isclose(g.real, s0, rel_tol=1e-9):
        raise PhysicsDomainError(
            f"lens needs a packet whose real part is its waist ({g.real!r} vs waist {s0!r})"
        )
    L = g.imag / lam
    w2 = abs(g) ** 2 / g.real
    m = lam * (L - 4.0 * f)
    disc = w2 * w2 - 4.0 * m * m
    if disc < 0:
        if disc < -1e-12 * w2 * w2:
            raise NoRealWaistError(
                f"no real waist after lens: width^2={w2:.6e} m^2, Lambda={lam:.6e} m, "
                f"L={L:.6e} m, f={f:.6e} m (need |L-4f| <= width^2/(2 Lambda))"
            )
        disc = 0.0
    big = 0.5 * (w2 + math.sqrt(disc))
    small = m * m / big
    near, far = (big, small) if abs(big - s0) <= abs(small - s0) else (small, big)
    s2 = near if root == "near" else far
    if s2 <= 0:
        raise NoRealWaistError("lens maps the packet to a zero-width waist")
    return GaussianPacket(complex(s2, m), s2, p.normalized, p.conditioned)


def arm_length(arm: Sequence[OpticalElement]) -> Length:
    return math.fsum(e.length for e in arm if isinstance(e, FreeSpace))


def validate_arms(arm1: Sequence[OpticalElement], arm2: Sequence[OpticalElement]) -> int:
    """Check pipeline structure; return the index of slit A in ``arm1``."""
    slits = [i for i, e in enumerate(arm1) if isinstance(e, Slit)]
    if len(slits) != 1:
        raise PipelineError(f"arm 1 needs exactly one slit, found {len(slits)}")
    idx = slits[0]
    for e in arm1[:idx]:
        if isinstance(e, Detector):
            raise PipelineError("detector placed before slit A in arm 1")
    for e in arm1[idx + 1:]:
        if isinstance(e, Lens):
            raise PipelineError("a lens after slit A is not supported")
    for e in arm2:
        if isinstance(e, Slit):
            raise PipelineError("arm 2 must not contain a slit (slit B is wide open)")
        if isinstance(e, Lens):
            raise PipelineError("a lens in arm 2 is not supported")
    if not arm2 or not isinstance(arm2[-1], Detector):
        raise PipelineError("arm 2 must end at a detector")
    if any(isinstance(e, Detector) for e in arm2[:-1]):
        raise PipelineError("arm 2 may hold only one detector, at its end")
    return idx


def run_pipeline(src: SourceSpec, arm1: Sequence[OpticalElement],
                 arm2: Sequence[OpticalElement], lens_root: str = "near") -> GaussianPacket:
    """Particle 2's packet at the end of ``arm2``, conditioned on slit A in ``arm1``."""
    idx = validate_arms(arm1, arm2)
    scale = src.scale
    slit = arm1[idx].spec
    lam_l2 = scale.Lambda * arm_length(arm2)
    if slit.is_open:
        gamma = _open_slit_limit(src.lc2, src.omega2)
        return GaussianPacket(gamma + 1j * lam_l2, gamma.real, conditioned=False)
    packet = slit_packet(slit)
    for e in reversed(arm1[:idx]):
        if isinstance(e, FreeSpace):
            packet = free_propagate(packet, e.length, scale)
        elif isinstance(e, Lens):
            packet = lens_transform(packet, e.focal_length, scale, root=lens_root)
    gamma = condition_source(packet.gamma, src.lc2, src.omega2) + 1j * lam_l2
    return GaussianPacket(gamma, packet.waist_hint + src.lc2)
