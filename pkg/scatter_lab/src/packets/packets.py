"""Parabolic wave packets and the forward-moving Cauchy data built from them.

The standard packet has a separable spectrum a(xi_1) b(xi_2) supported in
[1.5, 3] x [-0.75, 0.75]: Gaussians of width 0.3 multiplied by C-infinity
bumps. Its profiles along and across the direction of travel are 1D
inverse Fourier integrals evaluated by the trapezoid rule, and the L2
norm is fixed through Plancherel.
"""
import logging
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from ...validation.error_codes import LabErrorCode
from ...validation.exceptions import (
    CutoffClipped,
    FrozenCoefficientWarning,
    SupportViolation,
    UnresolvedFrequency,
)
from ..geometry.grid import Grid
from ..maths.vectors import rotation_to
from ..wave.cauchy import CauchyPair, Medium

logger = logging.getLogger(__name__)

ALONG_BAND = (1.5, 3.0)
ACROSS_HALF_WIDTH = 0.75
SPECTRAL_WIDTH = 0.3
QUADRATURE_POINTS = 512
CHUNK = 8192
RESOLUTION_LIMIT = 0.25 * np.pi
FROZEN_TOLERANCE = 0.01


def bump(s: np.ndarray) -> np.ndarray:
    """exp(1 - 1/(1 - s^2)) on |s| < 1, zero outside."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)

    def f(x):
        return np.where(x > 0.0, np.exp(-1.0 / np.maximum(x, 1e-300)), 0.0)

    return f(t) / (f(t) + f(1.0 - t))


class StandardPacket:
    """phi(x) = A(x_1) prod B(x_k), unit L2 norm, spectrum inside {xi_1 > 1}."""

    def __init__(self, dim: int):
        self.dim = dim
        lo, hi = ALONG_BAND
        self.centre = 0.5 * (lo + hi)
        self.xi_along = np.linspace(lo, hi, QUADRATURE_POINTS)
        self.xi_across = np.linspace(-ACROSS_HALF_WIDTH, ACROSS_HALF_WIDTH, QUADRATURE_POINTS)
        self.w_along = _trapezoid_weights(self.xi_along)
        self.w_across = _trapezoid_weights(self.xi_across)
        raw_a = self._along_spectrum(self.xi_along)
        raw_b = self._across_spectrum(self.xi_across)
        # Plancherel: |A|^2 integrates to (1/2pi) int |a|^2
        self.norm_a = np.sqrt(np.sum(self.w_along * raw_a ** 2) / (2.0 * np.pi))
        self.norm_b = np.sqrt(np.sum(self.w_across * raw_b ** 2) / (2.0 * np.pi))
        self.a = raw_a / self.norm_a
        self.b = raw_b / self.norm_b

    def _along_spectrum(self, xi):
        half = 0.5 * (ALONG_BAND[1] - ALONG_BAND[0])
        return np.exp(-0.5 * ((xi - self.centre) / SPECTRAL_WIDTH) ** 2) * bump((xi - self.centre) / half)

    def _across_spectrum(self, xi):
        return np.exp(-0.5 * (xi / SPECTRAL_WIDTH) ** 2) * bump(xi / ACROSS_HALF_WIDTH)

    def spectrum(self, xi: np.ndarray) -> np.ndarray:
        """Normalised phi-hat at (N, dim) frequencies."""
        xi = np.asarray(xi, dtype=float).reshape(-1, self.dim)
        out = self._along_spectrum(xi[:, 0]) / self.norm_a
        for k in range(1, self.dim):
            out = out * self._across_spectrum(xi[:, k]) / self.norm_b
        return out

    def along(self, s: np.ndarray) -> np.ndarray:
        """A(s) = (1/2pi) int a(xi) exp(i xi s) dxi."""
        return _inverse_transform(np.asarray(s, dtype=float), self.xi_along, self.w_along * self.a, complex_valued=True)

    def across(self, s: np.ndarray) -> np.ndarray:
        """B(s); real and even since b is."""
        return _inverse_transform(np.asarray(s, dtype=float), self.xi_across, self.w_across * self.b, complex_valued=False)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        out = self.along(pts[:, 0]).astype(complex)
        for k in range(1, self.dim):
            out *= self.across(pts[:, k])
        return out


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    w = np.full(len(x), x[1] - x[0])
    w[[0, -1]] *= 0.5
    return w


def _inverse_transform(s, xi, weighted, complex_valued):
    flat = s.ravel()
    out = np.empty(flat.shape, dtype=complex if complex_valued else float)
    for start in range(0, len(flat), CHUNK):
        block = flat[start:start + CHUNK, None] * xi[None, :]
        if complex_valued:
            out[start:start + CHUNK] = np.exp(1j * block) @ weighted
        else:
            out[start:start + CHUNK] = np.cos(block) @ weighted
    return (out / (2.0 * np.pi)).reshape(s.shape)


def standard_packet(grid: Grid) -> np.ndarray:
    """The standard packet sampled on the grid, centred at the origin, moving along x_1."""
    packet = StandardPacket(grid.dim)
    axes = grid.axes()
    out = packet.along(axes[0]).astype(complex)
    if grid.dim == 2:
        out = np.outer(out, packet.across(axes[1]))
    return out


@dataclass(frozen=True)
class PacketSpec:
    """Scale, centre and direction of a dilated packet; `unit` sets its physical length scale."""
    scale: float
    center: Tuple[float, ...]
    direction: Tuple[float, ...]
    unit: float = 1.0
    r0: float = 5.5
    eps_exp: float = 0.1

    @property
    def radii(self) -> Tuple[float, float]:
        """Longitudinal and transverse radii of U."""
        lam = self.scale
        return (
            self.r0 * self.unit * lam ** (-1.0 + self.eps_exp),
            self.r0 * self.unit * lam ** (-0.5 + self.eps_exp),
        )

    @property
    def cutoff_radius(self) -> float:
        return self.radii[1]

    def frame(self) -> np.ndarray:
        return rotation_to(np.asarray(self.direction, dtype=float))


@dataclass
class PlacedPacket:
    spec: PacketSpec
    grid: Grid
    values: np.ndarray = field(repr=False)
    cutoff: np.ndarray = field(repr=False)
    guard: np.ndarray = field(repr=False)

    @cached_property
    def support(self) -> np.ndarray:
        return self.guard > 0.0


def elliptic_radius(spec: PacketSpec, grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    """Packet-frame coordinates of every node and their radius relative to U."""
    frame = spec.frame()
    local = (grid.points() - np.asarray(spec.center, dtype=float)) @ frame
    r_long, r_trans = spec.radii
    q2 = (local[:, 0] / r_long) ** 2
    if grid.dim == 2:
        q2 = q2 + (local[:, 1] / r_trans) ** 2
    return local, np.sqrt(q2).reshape(grid.shape)


def dilate_place(packet: StandardPacket, spec: PacketSpec, grid: Grid) -> PlacedPacket:
    """phi_(lambda, x, xi) with cutoff rho (1 on U, 0 outside 1.5 U) and guard (1 on 1.5 U, 0 outside 2 U).

    The packet is evaluated on 2.5 U and set to zero beyond.
    """
    lam, unit = spec.scale, spec.unit
    if lam * grid.spacing / unit > RESOLUTION_LIMIT:
        raise UnresolvedFrequency(
            f"Scale {lam:g} needs spacing below {RESOLUTION_LIMIT * unit / lam:.3g}, got {grid.spacing:g}"
        )
    local, q = elliptic_radius(spec, grid)
    guard = 1.0 - smooth_step((q - 1.5) / 0.5)
    if np.any(q[grid.boundary_mask] < 2.0):
        raise CutoffClipped(f"Packet cutoff around {list(spec.center)} reaches the grid boundary")
    cutoff = 1.0 - smooth_step((q - 1.0) / 0.5)

    active = (q <= 2.5).ravel()
    values = np.zeros(grid.size, dtype=complex)
    pts = local[active]
    amplitude = lam ** ((grid.dim + 1) / 4.0) * unit ** (-grid.dim / 2.0)
    values[active] = amplitude * packet.along(lam * pts[:, 0] / unit)
    if grid.dim == 2:
        values[active] *= packet.across(np.sqrt(lam) * pts[:, 1] / unit)
    logger.debug(f"Placed packet at scale {lam:g}: {int(active.sum())} active nodes")
    return PlacedPacket(spec=spec, grid=grid, values=values.reshape(grid.shape), cutoff=cutoff, guard=guard)


def inverse_abs_derivative(values: np.ndarray, grid: Grid) -> np.ndarray:
    """|D|^-1 as a Fourier multiplier on the grid box; the zero mode is dropped."""
    freqs = np.meshgrid(*[2.0 * np.pi * np.fft.fftfreq(n, d=grid.spacing) for n in grid.shape], indexing="ij")
    magnitude = np.sqrt(sum(f ** 2 for f in freqs))
    multiplier = np.zeros_like(magnitude)
    np.divide(1.0, magnitude, out=multiplier, where=magnitude > 0.0)
    return np.fft.ifftn(np.fft.fftn(values) * multiplier)


def frozen_speed(medium: Medium, placed: PlacedPacket) -> float:
    """Speed at the packet centre; warns when it varies by more than 1% over the cutoff."""
    grid = placed.grid
    c_star = float(medium.speed[grid.nearest_index(placed.spec.center)])
    support = placed.cutoff > 0.0
    speeds = medium.speed[support]
    if not np.all(np.isfinite(speeds)):
        raise SupportViolation("Packet cutoff reaches nodes where the speed is hidden")
    variation = float(np.max(np.abs(speeds - c_star))) / c_star
    if variation > FROZEN_TOLERANCE:
        message = f"Speed varies by {100.0 * variation:.1f}% over the packet at {list(placed.spec.center)}"
        logger.warning(f"{LabErrorCode.FROZEN_COEFFICIENT.name}: {message}")
        warnings.warn(message, FrozenCoefficientWarning, stacklevel=2)
    return c_star


def packet_cauchy_data(medium: Medium, spec: PacketSpec, allowed: Optional[np.ndarray] = None,
                       packet: Optional[StandardPacket] = None) -> CauchyPair:
    """Data (Re g+, -c* Re(rho phi)) with g+ = -i |D|^-1 (rho phi), travelling along the packet direction.

    `allowed` is the node set that must contain the packet support (Theta
    minus Omega when launching toward a hidden region).
    """
    grid = medium.grid
    packet = packet or StandardPacket(grid.dim)
    placed = dilate_place(packet, spec, grid)
    if allowed is not None and np.any(placed.support & ~allowed):
        raise SupportViolation(
            f"Packet support leaves the allowed region on {int(np.sum(placed.support & ~allowed))} nodes"
        )
    c_star = frozen_speed(medium, placed)
    localized = placed.cutoff * placed.values
    g_plus = -1j * inverse_abs_derivative(localized, grid)
    h0 = np.real(g_plus) * placed.guard
    h0[grid.boundary_mask] = 0.0
    h1 = -c_star * np.real(localized)
    return CauchyPair(h0, h1, medium)


def second_moment_radius(values: np.ndarray, grid: Grid) -> float:
    """sqrt of the |values|^2-weighted mean squared distance from the weighted centre."""
    weight = np.abs(values).ravel() ** 2
    pts = grid.points()
    centre = weight @ pts / weight.sum()
    return float(np.sqrt(weight @ ((pts - centre) ** 2).sum(axis=1) / weight.sum()))
