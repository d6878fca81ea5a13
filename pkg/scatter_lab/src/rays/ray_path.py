from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

COMPLETE = "complete"
TIR = "tir"


@dataclass(frozen=True)
class Crossing:
    """Refraction event; angles are measured from the interface normal."""
    interface: int
    point: np.ndarray
    time: float
    alpha: float
    beta: float
    c_up: float
    c_down: float

    def snell_residual(self) -> float:
        return abs(np.sin(self.alpha) / self.c_up - np.sin(self.beta) / self.c_down)


@dataclass
class RayPath:
    """Broken geodesic parametrised by travel time."""
    vertices: List[Tuple[np.ndarray, float]] = field(default_factory=list)
    segments: List[np.ndarray] = field(default_factory=list)
    crossings: List[Crossing] = field(default_factory=list)
    termination: str = COMPLETE

    @property
    def points(self) -> np.ndarray:
        return np.array([p for p, _ in self.vertices])

    @property
    def times(self) -> np.ndarray:
        return np.array([t for _, t in self.vertices])

    @property
    def endpoint(self) -> np.ndarray:
        return self.vertices[-1][0]

    @property
    def duration(self) -> float:
        return self.vertices[-1][1] - self.vertices[0][1]

    def point_at(self, t: float) -> np.ndarray:
        """Piecewise-linear position at travel time t."""
        times = self.times
        pts = self.points
        return np.array([np.interp(t, times, pts[:, i]) for i in range(pts.shape[1])])

    def closest_approach(self, y: Sequence[float]) -> Tuple[float, float]:
        """(distance, travel time) of the closest point of the polyline to y."""
        y = np.asarray(y, dtype=float)
        pts = self.points
        times = self.times
        if len(pts) == 1:
            return float(np.linalg.norm(pts[0] - y)), float(times[0])
        a, b = pts[:-1], pts[1:]
        ab = b - a
        length2 = np.maximum((ab * ab).sum(axis=1), 1e-300)
        s = np.clip(((y - a) * ab).sum(axis=1) / length2, 0.0, 1.0)
        closest = a + s[:, None] * ab
        dist = np.linalg.norm(closest - y, axis=1)
        k = int(np.argmin(dist))
        return float(dist[k]), float(times[k] + s[k] * (times[k + 1] - times[k]))

    def crossing_times(self) -> List[float]:
        return [c.time for c in self.crossings]

    def reversed(self) -> 'RayPath':
        """Same curve traversed backwards; crossings swap incidence and refraction."""
        t_end = self.vertices[-1][1]
        vertices = [(p.copy(), t_end - t) for p, t in reversed(self.vertices)]
        segments = [-d for d in reversed(self.segments)]
        crossings = [
            Crossing(c.interface, c.point, t_end - c.time, c.beta, c.alpha, c.c_down, c.c_up)
            for c in reversed(self.crossings)
        ]
        return RayPath(vertices=vertices, segments=segments, crossings=crossings, termination=self.termination)

    def rows(self) -> List[List[float]]:
        """Polyline rows (t, x...) followed by crossing annotations."""
        out = []
        crossing_at = {round(c.time, 12): c for c in self.crossings}
        for p, t in self.vertices:
            c = crossing_at.get(round(t, 12))
            annotation = [c.interface, c.alpha, c.beta, c.c_up, c.c_down] if c else [-1, 0.0, 0.0, 0.0, 0.0]
            out.append([t, *p.tolist(), *annotation])
        return out

    def header(self) -> List[str]:
        dim = len(self.vertices[0][0]) if self.vertices else 0
        return ["t"] + [f"x{i}" for i in range(dim)] + ["interface", "alpha", "beta", "c_up", "c_down"]
