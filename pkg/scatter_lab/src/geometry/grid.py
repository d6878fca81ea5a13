from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Tuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist


@dataclass(frozen=True)
class Grid:
    """Uniform Cartesian node grid; array[i, j] is the node at origin + (i, j)*spacing.

    The outermost node layer is the boundary of the ambient box and carries
    zero Dirichlet data.
    """
    origin: Tuple[float, ...]
    spacing: float
    shape: Tuple[int, ...]

    @classmethod
    def from_extent(cls, extent: Sequence[Sequence[float]], spacing: float) -> 'Grid':
        origin = tuple(float(lo) for lo, _ in extent)
        shape = tuple(int(round((hi - lo) / spacing)) + 1 for lo, hi in extent)
        return cls(origin=origin, spacing=float(spacing), shape=shape)

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    @property
    def extent(self) -> Tuple[Tuple[float, float], ...]:
        return tuple(
            (o, o + (n - 1) * self.spacing) for o, n in zip(self.origin, self.shape)
        )

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def axes(self) -> Tuple[np.ndarray, ...]:
        return tuple(o + self.spacing * np.arange(n) for o, n in zip(self.origin, self.shape))

    @cached_property
    def coords(self) -> Tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.axes(), indexing="ij"))

    def points(self) -> np.ndarray:
        """All node coordinates as an (N, dim) array in row-major order."""
        return np.stack([c.ravel() for c in self.coords], axis=-1)

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        for axis in range(self.dim):
            index = [slice(None)] * self.dim
            index[axis] = 0
            mask[tuple(index)] = True
            index[axis] = -1
            mask[tuple(index)] = True
        return mask

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def contains(self, point: Sequence[float]) -> bool:
        return all(lo <= x <= hi for x, (lo, hi) in zip(point, self.extent))

    def nearest_index(self, point: Sequence[float]) -> Tuple[int, ...]:
        index = np.rint((np.asarray(point, dtype=float) - np.asarray(self.origin)) / self.spacing)
        return tuple(int(np.clip(k, 0, n - 1)) for k, n in zip(index, self.shape))

    def node(self, index: Sequence[int]) -> np.ndarray:
        return np.asarray(self.origin) + self.spacing * np.asarray(index, dtype=float)

    def __str__(self) -> str:
        return f"Grid(shape={self.shape}, h={self.spacing:g}, origin={self.origin})"


def neighbour_any(mask: np.ndarray) -> np.ndarray:
    """Nodes with at least one axis neighbour inside `mask` (5-point stencil)."""
    out = np.zeros_like(mask, dtype=bool)
    for axis in range(mask.ndim):
        front = [slice(None)] * mask.ndim
        back = [slice(None)] * mask.ndim
        front[axis] = slice(1, None)
        back[axis] = slice(None, -1)
        out[tuple(back)] |= mask[tuple(front)]
        out[tuple(front)] |= mask[tuple(back)]
    return out


def mask_diameter(grid: Grid, mask: np.ndarray) -> float:
    """Largest Euclidean distance between two nodes of `mask`."""
    pts = grid.points()[mask.ravel()]
    if len(pts) < 2:
        return 0.0
    if grid.dim == 1:
        return float(np.ptp(pts[:, 0]))
    try:
        pts = pts[ConvexHull(pts).vertices]
    except QhullError:
        pass
    return float(pdist(pts).max())
