"""Transmitted broken geodesics of c^-2 dx^2.

Rays are parametrised by travel time: dx/dt = c n and
dn/dt = -grad c + (n . grad c) n. Constant pieces are traced exactly as
straight segments; smooth pieces use RK4 and bisect the region level set
to locate crossings. At each interface the direction is refracted by
Snell's law; total internal reflection ends the path.
"""
import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from ...validation.exceptions import TangentialCrossing, TIRTermination
from ..geometry.regions import Region
from ..maths.vectors import normalize, refract
from .ray_path import TIR, Crossing, RayPath

logger = logging.getLogger(__name__)

TANGENTIAL_COS = 1e-3
DEFAULT_STEP = 1e-3
SIDE_OFFSET = 1e-9


class _Tracer:
    def __init__(self, model, step: float = DEFAULT_STEP):
        self.model = model
        self.step = step
        self.interfaces = model.interfaces

    def region_at(self, x: np.ndarray, direction: np.ndarray) -> int:
        """Region entered when leaving x along direction."""
        return int(self.model.region_id((x + SIDE_OFFSET * direction)[None])[0])

    def _speed(self, region: int, x: np.ndarray) -> float:
        return float(self.model.regions[region].speed(x[None])[0])

    def _interface_normal(self, x: np.ndarray, region: int) -> Tuple[int, np.ndarray]:
        if self.interfaces:
            distances = [float(i.distance(x[None])[0]) for i in self.interfaces]
            k = int(np.argmin(distances))
            return k, normalize(self.interfaces[k].normal(x))
        return -1, normalize(self.model.regions[region].indicator.gradient(x))

    def refract_at(self, path: RayPath, x: np.ndarray, n: np.ndarray, t: float,
                   region: int) -> Optional[Tuple[np.ndarray, int]]:
        k, normal = self._interface_normal(x, region)
        if np.dot(normal, n) < 0.0:
            normal = -normal
        cos_a = float(np.clip(np.dot(normal, n), -1.0, 1.0))
        if cos_a < TANGENTIAL_COS:
            raise TangentialCrossing(f"Ray meets interface {k} at {x.tolist()} with cos(alpha) = {cos_a:.2e}")
        downstream = self.region_at(x, normal)
        c_up = self._speed(region, x)
        c_down = self._speed(downstream, x)
        refracted = refract(n, normal, c_down / c_up)
        alpha = float(np.arccos(cos_a))
        if refracted is None:
            path.crossings.append(Crossing(k, x.copy(), t, alpha, np.pi / 2, c_up, c_down))
            path.termination = TIR
            logger.debug(f"Total internal reflection at {x.tolist()}, t={t:.4g}")
            return None
        refracted = normalize(refracted)
        beta = float(np.arccos(np.clip(np.dot(refracted, normal), -1.0, 1.0)))
        path.crossings.append(Crossing(k, x.copy(), t, alpha, beta, c_up, c_down))
        return refracted, downstream

    def _straight(self, x, n, region, remaining):
        """Exact segment in a constant piece; returns (x, dt, hit)."""
        c = self._speed(region, x)
        hits = [s for i in self.interfaces if (s := i.intersect_ray(x, n)) is not None and s > 1e-9]
        if hits and min(hits) / c < remaining:
            s = min(hits)
            return x + s * n, s / c, True
        return x + remaining * c * n, remaining, False

    def _rhs(self, region, x, n):
        piece = self.model.regions[region].speed
        c = float(piece(x[None])[0])
        grad = piece.gradient(x[None])[0]
        return c * n, -grad + np.dot(n, grad) * n

    def _rk4(self, region, x, n, dt):
        k1x, k1n = self._rhs(region, x, n)
        k2x, k2n = self._rhs(region, x + 0.5 * dt * k1x, normalize(n + 0.5 * dt * k1n))
        k3x, k3n = self._rhs(region, x + 0.5 * dt * k2x, normalize(n + 0.5 * dt * k2n))
        k4x, k4n = self._rhs(region, x + dt * k3x, normalize(n + dt * k3n))
        x_new = x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        n_new = normalize(n + dt / 6.0 * (k1n + 2.0 * k2n + 2.0 * k3n + k4n))
        return x_new, n_new

    def _smooth(self, x, n, region, remaining):
        """One RK4 step, shortened to the region boundary if it is crossed."""
        dt = min(self.step, remaining)
        x_new, n_new = self._rk4(region, x, n, dt)
        indicator = self.model.regions[region].indicator
        if indicator.value(x_new) >= 0.0 or indicator.value(x) < 0.0:
            return x_new, n_new, dt, False
        lo, hi = 0.0, dt
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if indicator.value(self._rk4(region, x, n, mid)[0]) >= 0.0:
                lo = mid
            else:
                hi = mid
        x_hit, n_hit = self._rk4(region, x, n, hi)
        return x_hit, n_hit, hi, True

    def trace(self, x0: Sequence[float], direction: Sequence[float], T: float) -> RayPath:
        x = np.asarray(x0, dtype=float).copy()
        n = normalize(direction)
        region = self.region_at(x, n)
        t = 0.0
        path = RayPath(vertices=[(x.copy(), 0.0)])
        while t < T - 1e-14:
            remaining = T - t
            if self.model.regions[region].speed.is_constant:
                x, dt, hit = self._straight(x, n, region, remaining)
                path.segments.append(n.copy())
            else:
                x, n, dt, hit = self._smooth(x, n, region, remaining)
                path.segments.append(n.copy())
            t += dt
            path.vertices.append((x.copy(), t))
            if hit:
                refracted = self.refract_at(path, x, n, t, region)
                if refracted is None:
                    break
                n, region = refracted
        return path


def trace_geodesic(model, x0: Sequence[float], direction: Sequence[float], T: float,
                   step: float = DEFAULT_STEP) -> RayPath:
    """Transmitted broken geodesic from (x0, direction) for travel time T."""
    return _Tracer(model, step).trace(x0, direction, T)


def trace_normal_geodesic(model, omega: Region, p: Sequence[float], T_max: float,
                          step: float = DEFAULT_STEP) -> RayPath:
    """exp(p, t) for t in [0, T_max] along the inward normal of omega at p."""
    return trace_geodesic(model, p, omega.inward_normal(p), T_max, step)


def broken_exponential(model, omega: Region, p: Sequence[float], T: float,
                       step: float = DEFAULT_STEP) -> np.ndarray:
    path = trace_normal_geodesic(model, omega, p, T, step)
    if path.termination == TIR:
        raise TIRTermination(f"Normal ray from {list(p)} is totally reflected before time {T:g}")
    return path.endpoint
