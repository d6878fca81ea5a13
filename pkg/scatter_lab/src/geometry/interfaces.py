"""Interface curves between speed regions: points (1D), polylines and circles (2D)."""
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional, Sequence

import numpy as np

from ...validation.exceptions import MalformedInterface
from ..maths.ray_segment_intersection import ray_circle_intersect, ray_segment_intersect


class Interface(ABC):
    dim: int
    name: str = ""

    @abstractmethod
    def distance(self, points: np.ndarray) -> np.ndarray:
        """Unsigned distance from each of (N, dim) points to the curve."""

    @abstractmethod
    def intersect_ray(self, origin: np.ndarray, direction: np.ndarray) -> Optional[float]:
        """Smallest positive ray parameter at which the ray meets the curve."""

    @abstractmethod
    def normal(self, point: np.ndarray) -> np.ndarray:
        """Unit normal at a point on the curve (orientation arbitrary)."""

    @abstractmethod
    def samples(self, count: int) -> np.ndarray:
        """Points spread along the curve, used for validation."""


class PointInterface(Interface):
    def __init__(self, at: float, name: str = ""):
        self.dim = 1
        self.at = float(at)
        self.name = name

    def distance(self, points):
        return np.abs(np.asarray(points, dtype=float).reshape(-1) - self.at)

    def intersect_ray(self, origin, direction):
        if direction[0] == 0.0:
            return None
        t = (self.at - origin[0]) / direction[0]
        return t if t > 1e-12 else None

    def normal(self, point):
        return np.array([1.0])

    def samples(self, count):
        return np.array([[self.at]])


class PolylineInterface(Interface):
    def __init__(self, vertices: Sequence[Sequence[float]], closed: bool = False, name: str = ""):
        self.vertices = np.asarray(vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2 or len(self.vertices) < 2:
            raise MalformedInterface(f"Polyline '{name}' needs at least two 2D vertices")
        self.closed = closed
        self.dim = 2
        self.name = name
        ends = np.roll(self.vertices, -1, axis=0) if closed else self.vertices[1:]
        self._a = self.vertices[: len(ends)]
        self._b = ends
        if np.any(np.linalg.norm(self._b - self._a, axis=1) == 0.0):
            raise MalformedInterface(f"Polyline '{name}' has repeated vertices")

    def distance(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        ab = self._b - self._a
        ap = pts[:, None, :] - self._a[None]
        t = np.clip((ap * ab).sum(-1) / (ab * ab).sum(-1), 0.0, 1.0)
        closest = self._a[None] + t[..., None] * ab[None]
        return np.linalg.norm(pts[:, None, :] - closest, axis=-1).min(axis=1)

    def _nearest_segment(self, point):
        ab = self._b - self._a
        ap = point[None] - self._a
        t = np.clip((ap * ab).sum(-1) / (ab * ab).sum(-1), 0.0, 1.0)
        d = np.linalg.norm(point[None] - (self._a + t[:, None] * ab), axis=1)
        return int(np.argmin(d))

    def intersect_ray(self, origin, direction):
        hits = [
            t for a, b in zip(self._a, self._b)
            if (t := ray_segment_intersect(origin, direction, a, b)) is not None
        ]
        return min(hits) if hits else None

    def normal(self, point):
        k = self._nearest_segment(np.asarray(point, dtype=float))
        edge = self._b[k] - self._a[k]
        n = np.array([-edge[1], edge[0]])
        return n / np.linalg.norm(n)

    def samples(self, count):
        per = max(2, count // len(self._a))
        s = np.linspace(0.05, 0.95, per)
        return np.concatenate([a + s[:, None] * (b - a) for a, b in zip(self._a, self._b)])


class CircleInterface(Interface):
    def __init__(self, center: Sequence[float], radius: float, name: str = ""):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        if self.radius <= 0.0:
            raise MalformedInterface(f"Circle '{name}' needs a positive radius")
        self.dim = 2
        self.name = name

    def distance(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return np.abs(np.linalg.norm(pts - self.center, axis=1) - self.radius)

    def intersect_ray(self, origin, direction):
        return ray_circle_intersect(origin, direction, self.center, self.radius)

    def normal(self, point):
        d = np.asarray(point, dtype=float) - self.center
        return d / np.linalg.norm(d)

    def samples(self, count):
        theta = np.linspace(0.0, 2.0 * np.pi, count, endpoint=False)
        return self.center + self.radius * np.column_stack([np.cos(theta), np.sin(theta)])


def interface_from_config(spec: Dict[str, Any], name: str = "") -> Interface:
    kind = spec.get("type")
    name = spec.get("name", name)
    if kind == "point":
        return PointInterface(spec["at"], name=name)
    if kind == "polyline":
        return PolylineInterface(spec["vertices"], closed=bool(spec.get("closed", False)), name=name)
    if kind == "circle":
        return CircleInterface(spec["center"], spec["radius"], name=name)
    raise MalformedInterface(f"Unknown interface type '{kind}'")
