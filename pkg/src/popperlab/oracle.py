"""Brute-force numerics used to validate every closed form in the package.

Nothing here reuses the closed-form Gaussian algebra: states are sampled on
grids, propagated with the free-particle kernel applied as a quadratic phase
in Fourier space, conditioned by direct quadrature and reduced to moments or
fitted Gaussian parameters. Lengths are SI; momenta are in units of hbar.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy import integrate

from .errors import ExtentTooSmallError, OracleError, ResolutionError
from .source import PairState, SourceSpec

DEFAULT_N = 1024
MIN_N = 64
EDGE_BAND = 1.0 / 16.0
EDGE_MASS_TOL = 1e-8


def _check_n(n: int) -> int:
    if n < MIN_N or n & (n - 1):
        raise OracleError(f"grid size must be a power of two >= {MIN_N}, got {n}")
    return n


def axis(extent: float, n: int) -> np.ndarray:
    """Sample points on [-extent, extent) with the origin on a sample."""
    return -extent + (2.0 * extent / n) * np.arange(n)


def wavenumbers(extent: float, n: int) -> np.ndarray:
    return 2.0 * np.pi * np.fft.fftfreq(n, d=2.0 * extent / n)


@dataclass(frozen=True, eq=False)
class Grid1D:
    extent: float
    n: int
    values: np.ndarray

    def __post_init__(self):
        _check_n(self.n)
        if self.values.shape != (self.n,):
            raise OracleError(f"expected {self.n} samples, got shape {self.values.shape}")

    @property
    def dy(self) -> float:
        return 2.0 * self.extent / self.n

    @property
    def y(self) -> np.ndarray:
        return axis(self.extent, self.n)

    @property
    def k(self) -> np.ndarray:
        return wavenumbers(self.extent, self.n)

    def normalized(self) -> "Grid1D":
        norm = math.sqrt(float(np.sum(np.abs(self.values) ** 2)) * self.dy)
        return Grid1D(self.extent, self.n, self.values / norm)


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Samples ``values[i, j] = psi(y[i], y[j])``; axis 0 is particle 1."""

    extent: float
    n: int
    values: np.ndarray

    def __post_init__(self):
        _check_n(self.n)
        if self.values.shape != (self.n, self.n):
            raise OracleError(f"expected {self.n}x{self.n} samples, got shape {self.values.shape}")

    @property
    def dy(self) -> float:
        return 2.0 * self.extent / self.n

    @property
    def y(self) -> np.ndarray:
        return axis(self.extent, self.n)

    @property
    def k(self) -> np.ndarray:
        return wavenumbers(self.extent, self.n)


Grid = Union[Grid1D, Grid2D]


@dataclass(frozen=True)
class OracleReport:
    quantity: str
    analytic: Union[float, complex]
    numeric: Union[float, complex]
    rel_err: float
    tolerance: float
    converged: bool
    n: int = 0
    extent: float = 0.0
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.converged and self.rel_err < self.tolerance

    def to_dict(self) -> dict:
        def enc(v):
            if isinstance(v, complex):
                return {"re": v.real, "im": v.imag}
            return v
        return {
            "quantity": self.quantity,
            "analytic": enc(self.analytic),
            "numeric": enc(self.numeric),
            "rel_err": self.rel_err,
            "tolerance": self.tolerance,
            "converged": self.converged,
            "passed": self.passed,
            "n": self.n,
            "extent": self.extent,
            "note": self.note,
        }


def edge_mass_fraction(values: np.ndarray) -> float:
    """Share of ``|psi|**2`` lying in the outer band of the window, any axis."""
    rho = np.abs(values) ** 2
    total = float(rho.sum())
    if total == 0.0:
        raise OracleError("grid holds no probability mass")
    n = values.shape[0]
    b = max(1, int(n * EDGE_BAND))
    inner = rho
    for ax in range(values.ndim):
        inner = np.take(inner, np.arange(b, n - b), axis=ax)
    return 1.0 - float(inner.sum()) / total


def check_window(grid: Grid, what: str = "grid") -> None:
    frac = edge_mass_fraction(grid.values)
    if frac > EDGE_MASS_TOL:
        raise ExtentTooSmallError(
            f"{what}: {frac:.3e} of the mass sits in the window edge band "
            f"(extent {grid.extent:.4e} m too small)"
        )


def central_mask(values: np.ndarray, fraction: float) -> np.ndarray:
    """Boolean mask of the highest-density samples holding ``fraction`` of the mass."""
    rho = np.abs(values).ravel() ** 2
    order = np.argsort(rho, kind="stable")[::-1]
    cum = np.cumsum(rho[order]) / rho.sum()
    keep = order[: int(np.searchsorted(cum, fraction)) + 1]
    mask = np.zeros(rho.size, dtype=bool)
    mask[keep] = True
    return mask.reshape(values.shape)


def max_rel_err(numeric: np.ndarray, analytic: np.ndarray, fraction: float) -> float:
    mask = central_mask(analytic, fraction)
    return float(np.max(np.abs(numeric[mask] - analytic[mask]) / np.abs(analytic[mask])))


# -- sampling -----------------------------------------------------------------

def _com_factor(y1, y2, omega2: float):
    if math.isinf(omega2):
        return 1.0
    return np.exp(-((y1 + y2) ** 2) / (4.0 * omega2))


def sample_initial_pair(src: SourceSpec, extent: float, n: int, method: str = "closed") -> Grid2D:
    """Source amplitude on an ``n x n`` grid, unnormalised (A = 1, hbar = 1).

    ``method="closed"`` evaluates the p-integrated Gaussian directly;
    ``method="quadrature"`` integrates the momentum representation
    ``exp(-p**2/4 sigma**2) exp(i p (y1 - y2))`` over p numerically.
    """
    _check_n(n)
    y = axis(extent, n)
    y1, y2 = y[:, None], y[None, :]
    sigma = 1.0 / src.lc
    if method == "closed":
        rel = 2.0 * math.sqrt(math.pi) * sigma * np.exp(-((y1 - y2) ** 2) * sigma ** 2)
    elif method == "quadrature":
        dy = 2.0 * extent / n
        u = dy * np.arange(-(n - 1), n)
        umax = float(np.max(np.abs(u)))
        pmax = 2.0 * sigma * math.sqrt(-math.log(1e-300))
        # trapezoid aliases in u with period 2*pi/h; keep images far outside |u| <= umax
        h = 2.0 * math.pi / (2.0 * umax + 60.0 * src.lc)
        m = 2 * int(math.ceil(pmax / h)) + 1
        p = np.linspace(-pmax, pmax, m)
        integrand = np.exp(-(p ** 2) / (4.0 * sigma ** 2))[None, :] * np.exp(1j * p[None, :] * u[:, None])
        table = integrate.trapezoid(integrand, p, axis=1)
        idx = np.arange(n)
        rel = table[(idx[:, None] - idx[None, :]) + (n - 1)]
    else:
        raise ValueError(f"unknown method {method!r}")
    values = rel * _com_factor(y1, y2, src.omega2)
    return Grid2D(extent, n, np.asarray(values, dtype=complex))


def sample_pair_state(pair: PairState, extent: float, n: int) -> Grid2D:
    y = axis(extent, n)
    return Grid2D(extent, n, np.asarray(pair.amplitude(y[:, None], y[None, :]), dtype=complex))


def sample_gaussian(gamma: complex, extent: float, n: int) -> Grid1D:
    y = axis(extent, n)
    return Grid1D(extent, n, np.exp(-(y ** 2) / complex(gamma)))


def normalize2d(grid: Grid2D) -> Grid2D:
    norm = math.sqrt(float(np.sum(np.abs(grid.values) ** 2)) * grid.dy ** 2)
    return Grid2D(grid.extent, grid.n, grid.values / norm)


def pad(grid: Grid1D, factor: int) -> Grid1D:
    """Embed samples in a window ``factor`` times wider at the same spacing."""
    n = grid.n * factor
    values = np.zeros(n, dtype=complex)
    start = (n - grid.n) // 2
    values[start:start + grid.n] = grid.values
    return Grid1D(grid.extent * factor, n, values)


# -- propagation and conditioning ---------------------------------------------

def spectral_propagate(grid: Grid, L: float, Lambda: float, particles="both"):
    """Free flight over distance ``L`` via the kernel ``exp(-1j Lambda L k**2 / 4)``.

    For a 2-D grid ``particles`` selects which axes evolve: 1, 2 or "both".
    """
    if L < 0:
        raise OracleError(f"propagation distance must be >= 0, got {L!r}")
    check_window(grid, "input")
    phase = np.exp(-0.25j * Lambda * L * grid.k ** 2)
    if isinstance(grid, Grid1D):
        out = Grid1D(grid.extent, grid.n, np.fft.ifft(np.fft.fft(grid.values) * phase))
    else:
        if particles not in (1, 2, "both"):
            raise ValueError(f"particles must be 1, 2 or 'both', got {particles!r}")
        axes = {1: (0,), 2: (1,), "both": (0, 1)}[particles]
        spec = np.fft.fftn(grid.values, axes=axes)
        if 0 in axes:
            spec = spec * phase[:, None]
        if 1 in axes:
            spec = spec * phase[None, :]
        out = Grid2D(grid.extent, grid.n, np.fft.ifftn(spec, axes=axes))
    check_window(out, "propagated state")
    return out


def _same_axis(grid2d: Grid2D, grid1d: Grid1D) -> None:
    if grid1d.n != grid2d.n or not math.isclose(grid1d.extent, grid2d.extent, rel_tol=1e-14):
        raise ResolutionError(
            f"slit grid (n={grid1d.n}, extent={grid1d.extent!r}) does not match "
            f"pair grid (n={grid2d.n}, extent={grid2d.extent!r})"
        )


def quadrature_condition(grid2d: Grid2D, slit_samples: Grid1D) -> Grid1D:
    """Particle-2 amplitude ``sum_y1 conj(phi1(y1)) psi(y1, y2) dy1`` (normalised)."""
    _same_axis(grid2d, slit_samples)
    dy_slit, _ = grid_moments(slit_samples)
    if dy_slit < 2.0 * grid2d.dy:
        raise ResolutionError(
            f"slit spread {dy_slit:.3e} m is under two grid steps ({grid2d.dy:.3e} m); refine the grid"
        )
    phi2 = grid2d.dy * (np.conj(slit_samples.values) @ grid2d.values)
    return Grid1D(grid2d.extent, grid2d.n, phi2).normalized()


def rect_slit_condition(grid2d: Grid2D, full_width: float) -> Grid1D:
    """Condition on a hard aperture ``|y1| <= full_width/2`` (normalised)."""
    if full_width < 4.0 * grid2d.dy:
        raise ResolutionError(
            f"aperture {full_width:.3e} m spans fewer than four grid steps ({grid2d.dy:.3e} m)"
        )
    # each sample weighted by the overlap of its cell with the aperture
    dy = grid2d.dy
    y = grid2d.y
    half = 0.5 * full_width
    aperture = np.clip(np.minimum(y + dy / 2, half) - np.maximum(y - dy / 2, -half), 0.0, None) / dy
    phi2 = grid2d.dy * (aperture @ grid2d.values)
    return Grid1D(grid2d.extent, grid2d.n, phi2.astype(complex)).normalized()


def marginal_sigma(grid2d: Grid2D, particle: int = 2) -> float:
    """Standard deviation of one particle's position marginal."""
    rho = np.abs(grid2d.values) ** 2
    marg = rho.sum(axis=0 if particle == 2 else 1)
    marg = marg / marg.sum()
    y = grid2d.y
    mean = float(np.sum(marg * y))
    return math.sqrt(float(np.sum(marg * (y - mean) ** 2)))


def grid_moments(grid: Grid1D) -> Tuple[float, float]:
    """Position and momentum standard deviations (momentum in units of hbar)."""
    rho = np.abs(grid.values) ** 2
    rho = rho / rho.sum()
    y = grid.y
    mean = float(np.sum(rho * y))
    dy = math.sqrt(float(np.sum(rho * (y - mean) ** 2)))
    spec = np.abs(np.fft.fft(grid.values)) ** 2
    spec = spec / spec.sum()
    k = grid.k
    kmean = float(np.sum(spec * k))
    dk = math.sqrt(float(np.sum(spec * (k - kmean) ** 2)))
    return dy, dk


def fit_gamma(grid: Grid1D, fraction: float = 0.999) -> complex:
    """Least-squares Gaussian parameter of a centred sampled packet.

    Fits ``log psi = c0 + c1 y + c2 y**2`` (unwrapped phase) over the central
    mass and returns ``-1/c2``.
    """
    mask = central_mask(grid.values, fraction)
    y = grid.y[mask]
    v = grid.values[mask]
    scale = float(np.max(np.abs(y))) or 1.0
    t = y / scale
    re = np.polyfit(t, np.log(np.abs(v)), 2)[0]
    im = np.polyfit(t, np.unwrap(np.angle(v)), 2)[0]
    c2 = complex(re, im) / scale ** 2
    return -1.0 / c2


def grid_fwhm(grid: Grid1D) -> float:
    """Full width at half maximum of ``|psi|**2`` by linear interpolation."""
    rho = np.abs(grid.values) ** 2
    i0 = int(np.argmax(rho))
    half = 0.5 * rho[i0]
    y = grid.y
    i = i0
    while i < grid.n - 1 and rho[i] > half:
        i += 1
    j = i0
    while j > 0 and rho[j] > half:
        j -= 1
    if rho[i] > half or rho[j] > half:
        raise ExtentTooSmallError("half-maximum level not reached inside the window")
    right = y[i - 1] + (half - rho[i - 1]) * (y[i] - y[i - 1]) / (rho[i] - rho[i - 1])
    left = y[j] + (half - rho[j]) * (y[j + 1] - y[j]) / (rho[j + 1] - rho[j])
    return float(right - left)


# -- independent conditioning by adaptive quadrature -------------------------

def _quad_complex(f: Callable[[float], complex], lo: float, hi: float, points) -> Tuple[complex, float]:
    opts = dict(epsabs=0.0, epsrel=2e-14, limit=500, points=points)
    re, err_re = integrate.quad(lambda t: f(t).real, lo, hi, **opts)
    im, err_im = integrate.quad(lambda t: f(t).imag, lo, hi, **opts)
    return complex(re, im), math.hypot(err_re, err_im)


def quad_condition(pair: PairState, epsilon: float, y2: float) -> Tuple[complex, float]:
    """``int exp(-y1**2/eps**2) psi(y1, y2) dy1`` by adaptive quadrature.

    ``psi`` is the evolved pair amplitude evaluated point by point.
    """
    d_rel = pair.d_rel
    inv_com = 0j if math.isinf(pair.omega2) else 1.0 / (4.0 * pair.d_com)
    e2 = epsilon ** 2

    def f(y1: float) -> complex:
        return cmath.exp(-y1 * y1 / e2 - (y1 - y2) ** 2 / d_rel - (y1 + y2) ** 2 * inv_com)

    half = abs(y2) + 14.0 * epsilon
    pts = sorted({0.0, min(max(y2, -half), half)})
    return _quad_complex(f, -half, half, pts)


def quad_conditioned_gamma(pair: PairState, epsilon: float, probe: float = 0.5) -> complex:
    """Gaussian parameter of the conditioned packet from two quadrature values.

    ``phi2(y)/phi2(0) = exp(-y**2/gamma)``; the probe offset is chosen as a
    fraction of ``sqrt(|gamma|)`` so the logarithm stays on its principal branch.
    """
    phi0, _ = quad_condition(pair, epsilon, 0.0)
    y = 0.05 * min(epsilon, math.sqrt(pair.lc2))
    for _ in range(2):
        phiy, _ = quad_condition(pair, epsilon, y)
        gamma = -y * y / cmath.log(phiy / phi0)
        y = probe * math.sqrt(abs(gamma))
    phiy, _ = quad_condition(pair, epsilon, y)
    return -y * y / cmath.log(phiy / phi0)


# -- convergence ---------------------------------------------------------------

@dataclass
class Refined:
    value: Union[float, complex]
    n: int
    extent: float
    converged: bool
    history: list = field(default_factory=list)


def refine(measure: Callable[[int, float], Union[float, complex]], n: int, extent: float,
           tol: float, max_n: int = 4096, absolute: bool = False, auto: bool = True) -> Refined:
    """Evaluate ``measure(n, extent)`` until refinement changes it by < tol/10.

    Each round compares the base grid against one with twice the samples on
    the same window (resolution) and one with twice the samples on twice the
    window (extent). ``absolute`` compares raw differences, for quantities
    that are themselves errors; otherwise changes are relative. With
    ``auto=False`` only the base grid is evaluated and the result is
    reported unconverged.
    """
    history = []

    def run(nn, ee):
        v = measure(nn, ee)
        history.append((nn, ee, v))
        return v

    try:
        v0 = run(n, extent)
    except ExtentTooSmallError:
        if not auto or 2 * n > max_n:
            raise
        return refine(measure, 2 * n, 2 * extent, tol, max_n, absolute, auto)
    if not auto:
        return Refined(v0, n, extent, False, history)

    def change(a, b):
        d = abs(a - b)
        return d if absolute else d / max(abs(b), 1e-300)

    while 2 * n <= max_n:
        v_res = run(2 * n, extent)
        v_ext = run(2 * n, 2 * extent)
        res_ok = change(v_res, v0) < 0.1 * tol
        ext_ok = change(v_ext, v0) < 0.1 * tol
        if res_ok and ext_ok:
            return Refined(v_res, 2 * n, extent, True, history)
        n *= 2
        if ext_ok:
            v0 = v_res
        else:
            extent *= 2
            v0 = v_ext
    return Refined(v0, n, extent, False, history)


def next_pow2(x: float) -> int:
    return max(MIN_N, 1 << int(math.ceil(math.log2(max(x, 1.0)))))


def auto_grid(max_sigma: float, min_scale: float, n: Optional[int] = None,
              extent_factor: float = 8.0, samples_per_scale: float = 4.0) -> Tuple[int, float]:
    """Window half-width ``extent_factor * max_sigma`` and a power-of-two size
    resolving ``min_scale`` with ``samples_per_scale`` points (at least ``n``)."""
    extent = extent_factor * max_sigma
    need = next_pow2(2.0 * extent * samples_per_scale / min_scale)
    return max(need, n or MIN_N), extent
