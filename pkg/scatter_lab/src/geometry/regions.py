"""Regions described by level sets, positive inside.

Level sets are (approximate) signed distances so that they can seed fast
marching with sub-cell boundary positions and give analytic normals.
"""
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ...validation.exceptions import ConfigSchemaError, PNotOnBoundary
from .grid import Grid


def _as_points(points, dim: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, dim) if pts.size != dim else pts.reshape(1, dim)
    return pts


class Region(ABC):
    dim: int

    @abstractmethod
    def levelset(self, points: np.ndarray) -> np.ndarray:
        """Signed value per point of an (N, dim) array, positive inside."""

    def value(self, point: Sequence[float]) -> float:
        return float(self.levelset(_as_points(point, self.dim))[0])

    def contains(self, point: Sequence[float]) -> bool:
        return self.value(point) > 0.0

    def levelset_on(self, grid: Grid) -> np.ndarray:
        return self.levelset(grid.points()).reshape(grid.shape)

    def mask(self, grid: Grid) -> np.ndarray:
        return self.levelset_on(grid) > 0.0

    def gradient(self, point: Sequence[float], step: float = 1e-7) -> np.ndarray:
        point = np.asarray(point, dtype=float)
        probes = []
        for axis in range(self.dim):
            e = np.zeros(self.dim)
            e[axis] = step
            probes.extend([point + e, point - e])
        values = self.levelset(np.array(probes))
        return (values[0::2] - values[1::2]) / (2.0 * step)

    def inward_normal(self, point: Sequence[float]) -> np.ndarray:
        g = self.gradient(point)
        norm = np.linalg.norm(g)
        if norm == 0.0:
            raise PNotOnBoundary(f"No well-defined normal at {list(point)}")
        return g / norm

    def project_to_boundary(self, point: Sequence[float], iterations: int = 30) -> np.ndarray:
        """Newton steps along the level-set gradient onto the zero set."""
        x = np.asarray(point, dtype=float).copy()
        for _ in range(iterations):
            phi = self.value(x)
            g = self.gradient(x)
            gg = float(np.dot(g, g))
            if gg == 0.0:
                break
            x = x - phi * g / gg
            if abs(phi) < 1e-13:
                break
        return x

    def on_boundary(self, point: Sequence[float], tolerance: float = 1e-6) -> bool:
        return abs(self.value(point)) <= tolerance


class Interval(Region):
    def __init__(self, lo: float, hi: float):
        self.dim = 1
        self.lo, self.hi = float(lo), float(hi)

    def levelset(self, points):
        x = _as_points(points, 1)[:, 0]
        return np.minimum(x - self.lo, self.hi - x)

    def __repr__(self):
        return f"Interval({self.lo}, {self.hi})"


class Disk(Region):
    def __init__(self, center: Sequence[float], radius: float):
        self.center = np.asarray(center, dtype=float)
        self.dim = self.center.size
        self.radius = float(radius)

    def levelset(self, points):
        pts = _as_points(points, self.dim)
        return self.radius - np.linalg.norm(pts - self.center, axis=1)

    def __repr__(self):
        return f"Disk({self.center.tolist()}, {self.radius})"


class Box(Region):
    def __init__(self, lo: Sequence[float], hi: Sequence[float]):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        self.dim = self.lo.size

    def levelset(self, points):
        pts = _as_points(points, self.dim)
        inside = np.minimum(pts - self.lo, self.hi - pts)
        outside = np.maximum(-inside, 0.0)
        return np.where(
            np.all(inside > 0, axis=1),
            inside.min(axis=1),
            -np.linalg.norm(outside, axis=1),
        )

    def __repr__(self):
        return f"Box({self.lo.tolist()}, {self.hi.tolist()})"


class HalfSpace(Region):
    """{x : (x - point) . normal > 0}."""

    def __init__(self, point: Sequence[float], normal: Sequence[float]):
        self.point = np.asarray(point, dtype=float)
        n = np.asarray(normal, dtype=float)
        self.normal = n / np.linalg.norm(n)
        self.dim = self.point.size

    def levelset(self, points):
        pts = _as_points(points, self.dim)
        return (pts - self.point) @ self.normal


class Polygon(Region):
    """Simple polygon; even-odd inside test, exact distance to the edges."""

    def __init__(self, vertices: Sequence[Sequence[float]]):
        self.vertices = np.asarray(vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2 or len(self.vertices) < 3:
            raise ConfigSchemaError("Polygon needs at least three 2D vertices", keys=["vertices"])
        self.dim = 2

    def levelset(self, points):
        pts = _as_points(points, 2)
        a = self.vertices
        b = np.roll(self.vertices, -1, axis=0)
        ab = b - a
        ap = pts[:, None, :] - a[None, :, :]
        t = np.clip((ap * ab).sum(-1) / (ab * ab).sum(-1), 0.0, 1.0)
        closest = a[None] + t[..., None] * ab[None]
        dist = np.linalg.norm(pts[:, None, :] - closest, axis=-1).min(axis=1)

        x, y = pts[:, 0:1], pts[:, 1:2]
        ya, yb = a[None, :, 1], b[None, :, 1]
        crosses = (ya > y) != (yb > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_cross = a[None, :, 0] + (y - ya) * (b[None, :, 0] - a[None, :, 0]) / (yb - ya)
        inside = (np.sum(crosses & (x < x_cross), axis=1) % 2) == 1
        return np.where(inside, dist, -dist)


class Union(Region):
    def __init__(self, parts: List[Region]):
        self.parts = list(parts)
        self.dim = self.parts[0].dim

    def levelset(self, points):
        return np.max([p.levelset(points) for p in self.parts], axis=0)

    def __repr__(self):
        return f"Union({self.parts})"


class Intersection(Region):
    def __init__(self, parts: List[Region]):
        self.parts = list(parts)
        self.dim = self.parts[0].dim

    def levelset(self, points):
        return np.min([p.levelset(points) for p in self.parts], axis=0)


class Complement(Region):
    def __init__(self, region: Region):
        self.region = region
        self.dim = region.dim

    def levelset(self, points):
        return -self.region.levelset(points)


class Dilation(Region):
    """Region grown outward by `radius` (exact for convex signed distances)."""

    def __init__(self, region: Region, radius: float):
        self.region = region
        self.radius = float(radius)
        self.dim = region.dim

    def levelset(self, points):
        return self.region.levelset(points) + self.radius


class Everywhere(Region):
    def __init__(self, dim: int):
        self.dim = dim

    def levelset(self, points):
        return np.full(len(_as_points(points, self.dim)), np.inf)


class GridLevelSet(Region):
    """Level set sampled on a grid, linearly interpolated (extrapolated outside)."""

    def __init__(self, grid: Grid, values: np.ndarray):
        self.grid = grid
        self.dim = grid.dim
        self.values = np.asarray(values, dtype=float)
        self._interp = RegularGridInterpolator(
            grid.axes(), self.values, method="linear", bounds_error=False, fill_value=None
        )

    def levelset(self, points):
        return self._interp(_as_points(points, self.dim))

    def mask(self, grid: Grid) -> np.ndarray:
        if grid == self.grid:
            return self.values > 0.0
        return super().mask(grid)


def region_from_config(spec: Dict[str, Any], siblings: Sequence[Region] = ()) -> Region:
    """Build a region from a YAML mapping such as {type: disk, center: [0, 0], radius: 1}."""
    kind = spec.get("type")
    if kind == "interval":
        return Interval(*spec["bounds"])
    if kind == "disk":
        return Disk(spec["center"], spec["radius"])
    if kind == "box":
        return Box(spec["lo"], spec["hi"])
    if kind == "halfspace":
        return HalfSpace(spec["point"], spec["normal"])
    if kind == "polygon":
        return Polygon(spec["vertices"])
    if kind == "union":
        return Union([region_from_config(s) for s in spec["parts"]])
    if kind == "intersection":
        return Intersection([region_from_config(s) for s in spec["parts"]])
    if kind == "complement":
        return Complement(region_from_config(spec["of"]))
    if kind == "dilation":
        return Dilation(region_from_config(spec["of"]), spec["radius"])
    if kind == "rest":
        if not siblings:
            return Everywhere(int(spec.get("dim", 1)))
        return Complement(Union(list(siblings)))
    raise ConfigSchemaError(f"Unknown region type '{kind}'", keys=["type"])
