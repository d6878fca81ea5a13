"""Cauchy data, the medium they live in, and the discrete energy inner product.

The energy form is <f, g> = f0^T K g0 + sum h^d c^-2 f1 g1 with K the
h^(d-2)-scaled graph Laplacian over every grid edge. Restricting to a node
set W weights each edge by the mean membership of its endpoints, so that
E_W + E_(W^c) = E exactly.
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

import numpy as np

from ...validation.exceptions import AccessViolation, GridMismatch, SupportViolation
from ..geometry.grid import Grid
from ..geometry.regions import Region

Mask = Union[np.ndarray, Region, None]


@dataclass(frozen=True, eq=False)
class Medium:
    """Nodal speed on a grid. NaN entries mark nodes whose speed is hidden."""
    grid: Grid
    speed: np.ndarray

    @classmethod
    def from_model(cls, model, grid: Grid) -> 'Medium':
        return cls(grid=grid, speed=model.sample(grid))

    @classmethod
    def constant(cls, grid: Grid, speed: float = 1.0) -> 'Medium':
        return cls(grid=grid, speed=np.full(grid.shape, float(speed)))

    def exterior(self, hidden: np.ndarray) -> 'Medium':
        """Copy with the speed removed on `hidden` nodes."""
        return Medium(grid=self.grid, speed=np.where(hidden, np.nan, self.speed))

    @cached_property
    def hidden(self) -> np.ndarray:
        return ~np.isfinite(self.speed)

    @cached_property
    def inverse_square(self) -> np.ndarray:
        return self.speed ** -2.0

    @property
    def c_max(self) -> float:
        return float(np.nanmax(self.speed))


def _weights(grid: Grid, W: Mask) -> Optional[np.ndarray]:
    if W is None:
        return None
    if isinstance(W, Region):
        W = W.mask(grid)
    if W.shape != grid.shape:
        raise GridMismatch(f"Mask of shape {W.shape} does not match {grid}")
    return W.astype(float)


def stiffness_form(grid: Grid, f0: np.ndarray, g0: np.ndarray, W: Mask = None) -> float:
    w = _weights(grid, W)
    total = 0.0
    for axis in range(grid.dim):
        prod = np.diff(f0, axis=axis) * np.diff(g0, axis=axis)
        if w is not None:
            n = w.shape[axis]
            prod = prod * 0.5 * (w.take(range(n - 1), axis=axis) + w.take(range(1, n), axis=axis))
        total += float(np.sum(prod))
    return total * grid.spacing ** (grid.dim - 2)


def kinetic_form(medium: Medium, f1: np.ndarray, g1: np.ndarray, W: Mask = None) -> float:
    """Mass-weighted pairing of velocities; raises if a nonzero term needs a hidden speed."""
    w = _weights(medium.grid, W)
    prod = f1 * g1 if w is None else f1 * g1 * w
    active = prod != 0.0
    if np.any(active & medium.hidden):
        raise AccessViolation("Kinetic pairing needs the speed inside the hidden region")
    inv = np.where(medium.hidden, 0.0, medium.inverse_square)
    return float(np.sum(inv * prod)) * medium.grid.cell_volume


@dataclass(frozen=True, eq=False)
class CauchyPair:
    """Displacement h0 (zero on the outer boundary) and velocity h1 on one grid."""
    h0: np.ndarray
    h1: np.ndarray
    medium: Medium

    def __post_init__(self):
        shape = self.medium.grid.shape
        if self.h0.shape != shape or self.h1.shape != shape:
            raise GridMismatch(f"Fields {self.h0.shape}/{self.h1.shape} do not match {self.medium.grid}")
        if np.any(self.h0[self.medium.grid.boundary_mask] != 0.0):
            raise SupportViolation("Displacement must vanish on the outer boundary")

    @classmethod
    def zeros(cls, medium: Medium) -> 'CauchyPair':
        return cls(medium.grid.zeros(), medium.grid.zeros(), medium)

    @property
    def grid(self) -> Grid:
        return self.medium.grid

    def with_medium(self, medium: Medium) -> 'CauchyPair':
        return CauchyPair(self.h0, self.h1, medium)

    def masked(self, mask: np.ndarray) -> 'CauchyPair':
        return CauchyPair(np.where(mask, self.h0, 0.0), np.where(mask, self.h1, 0.0), self.medium)

    def support(self) -> np.ndarray:
        return (self.h0 != 0.0) | (self.h1 != 0.0)

    def __add__(self, other: 'CauchyPair') -> 'CauchyPair':
        _check_grid(self, other)
        return CauchyPair(self.h0 + other.h0, self.h1 + other.h1, self.medium)

    def __sub__(self, other: 'CauchyPair') -> 'CauchyPair':
        _check_grid(self, other)
        return CauchyPair(self.h0 - other.h0, self.h1 - other.h1, self.medium)

    def __mul__(self, scalar: float) -> 'CauchyPair':
        return CauchyPair(scalar * self.h0, scalar * self.h1, self.medium)

    __rmul__ = __mul__

    def __neg__(self) -> 'CauchyPair':
        return self * -1.0


def _check_grid(f: CauchyPair, g: CauchyPair) -> None:
    if f.grid != g.grid:
        raise GridMismatch(f"Cauchy data on {f.grid} and {g.grid}")


def energy_inner_product(f: CauchyPair, g: CauchyPair, W: Mask = None) -> float:
    _check_grid(f, g)
    return stiffness_form(f.grid, f.h0, g.h0, W) + kinetic_form(f.medium, f.h1, g.h1, W)


def energy(h: CauchyPair, W: Mask = None) -> float:
    """E_W(h) = <h, h>_W."""
    return energy_inner_product(h, h, W)


def kinetic_energy(h: CauchyPair, W: Mask = None) -> float:
    """KE_W(h) = integral over W of c^-2 |h1|^2."""
    return kinetic_form(h.medium, h.h1, h.h1, W)


def potential_energy(h: CauchyPair, W: Mask = None) -> float:
    return stiffness_form(h.grid, h.h0, h.h0, W)


def energy_norm(h: CauchyPair) -> float:
    return float(np.sqrt(max(energy(h), 0.0)))


def time_reverse(h: CauchyPair) -> CauchyPair:
    """(f0, f1) -> (f0, -f1)."""
    return CauchyPair(h.h0, -h.h1, h.medium)
