"""Per-point regularity of broken geodesic normal coordinates.

Shoots transmitted normal rays from boundary samples of Omega, refines the
near misses by a golden-section search along the boundary and classifies
the target from the minimising arrivals.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from ...validation.exceptions import LabError, NoPathFound
from ..geometry.depth import solve_depth
from ..maths.vectors import perp
from .ray_path import TIR
from .symbols import GRAZING_TOLERANCE
from .tracer import DEFAULT_STEP, trace_normal_geodesic

logger = logging.getLogger(__name__)

REGULAR = "regular"
FOCAL = "focal"
MULTIPATH = "multipath"
DEMI_TANGENT = "demi-tangent"
ON_INTERFACE = "on-interface"

TIME_TOLERANCE = 1e-4
FOCAL_TOLERANCE = 1e-6


@dataclass
class Arrival:
    p: np.ndarray
    time: float
    miss: float
    grazing: bool = False


@dataclass
class RegularityReport:
    y: np.ndarray
    classification: str
    arrivals: List[Arrival] = field(default_factory=list)
    determinant: Optional[float] = None
    depth: Optional[float] = None


def boundary_samples(region, grid, max_samples: int = 256) -> np.ndarray:
    """Points of the region boundary from sign changes of its level set along grid edges."""
    phi = region.levelset_on(grid)
    points = grid.coords
    found = []
    for axis in range(grid.dim):
        a = [slice(None)] * grid.dim
        b = [slice(None)] * grid.dim
        a[axis] = slice(None, -1)
        b[axis] = slice(1, None)
        pa, pb = phi[tuple(a)], phi[tuple(b)]
        change = (pa > 0.0) != (pb > 0.0)
        mid = np.stack([0.5 * (c[tuple(a)][change] + c[tuple(b)][change]) for c in points], axis=-1)
        found.append(mid)
    samples = np.concatenate(found)
    if len(samples) > max_samples:
        samples = samples[np.linspace(0, len(samples) - 1, max_samples).astype(int)]
    return np.array([region.project_to_boundary(s) for s in samples])


class _Shooter:
    def __init__(self, model, omega, y, T_shoot, step):
        self.model = model
        self.omega = omega
        self.y = np.asarray(y, dtype=float)
        self.T_shoot = T_shoot
        self.step = step

    def boundary_point(self, p0, s):
        if p0.size == 1:
            return p0
        return self.omega.project_to_boundary(p0 + s * perp(self.omega.inward_normal(p0)))

    def shoot(self, p) -> Arrival:
        try:
            path = trace_normal_geodesic(self.model, self.omega, p, self.T_shoot, self.step)
        except LabError as e:
            logger.debug(f"Ray from {p.tolist()} discarded: {e}")
            return Arrival(p=p, time=np.inf, miss=np.inf)
        if path.termination == TIR:
            return Arrival(p=p, time=np.inf, miss=np.inf)
        miss, time = path.closest_approach(self.y)
        grazing = any(
            max(c.alpha, c.beta) > np.pi / 2 - GRAZING_TOLERANCE
            for c in path.crossings if c.time <= time
        )
        return Arrival(p=p, time=time, miss=miss, grazing=grazing)

    def refine(self, p0, width) -> Arrival:
        coarse = self.shoot(p0)
        if p0.size == 1:
            return coarse

        def miss(s):
            return self.shoot(self.boundary_point(p0, s)).miss

        bracket = (-width, 0.0, width) if coarse.miss < min(miss(-width), miss(width)) else (-width, width)
        try:
            result = minimize_scalar(miss, bracket=bracket, method="golden", options={"xtol": 1e-8})
        except (ValueError, RuntimeError):
            return coarse
        best = self.shoot(self.boundary_point(p0, result.x))
        return best if best.miss <= coarse.miss else coarse

    def endpoint(self, p, T) -> np.ndarray:
        return trace_normal_geodesic(self.model, self.omega, p, T, self.step).endpoint


def regularity_check(model, chain, y: Sequence[float], max_samples: int = 256,
                     step: float = DEFAULT_STEP, hit_tolerance: Optional[float] = None) -> RegularityReport:
    y = np.asarray(y, dtype=float)
    grid = chain.grid
    h = grid.spacing
    scale = max(hi - lo for lo, hi in grid.extent)
    hit_tolerance = 0.5 * h if hit_tolerance is None else hit_tolerance
    report = RegularityReport(y=y, classification=REGULAR)

    if any(float(i.distance(y[None])[0]) < 0.5 * h for i in model.interfaces):
        report.classification = ON_INTERFACE
        return report

    depth = solve_depth(model, chain, chain.omega)
    report.depth = float(depth.at(y)[0])
    T_shoot = 1.5 * max(report.depth, 0.0) + 4.0 * h / model.c_min
    shooter = _Shooter(model, chain.omega, y, T_shoot, step)

    samples = boundary_samples(chain.omega, grid, max_samples)
    coarse = [shooter.shoot(p) for p in samples]
    spacing = scale / max(len(samples), 1)
    candidates = [a for a in coarse if a.miss < max(4.0 * h, 2.0 * spacing)]
    refined = [
        a if a.miss < 0.1 * hit_tolerance else shooter.refine(a.p, max(h, spacing))
        for a in candidates
    ]
    hits = [a for a in refined if a.miss < hit_tolerance]
    if not hits:
        raise NoPathFound(f"No transmitted normal ray reaches {y.tolist()}")

    t_min = min(a.time for a in hits)
    minimizers = [a for a in hits if a.time <= t_min + TIME_TOLERANCE]
    report.arrivals = minimizers
    best = min(minimizers, key=lambda a: a.time)

    spread = max(np.linalg.norm(a.p - best.p) for a in minimizers)
    if spread > 5.0 * h:
        report.classification = MULTIPATH
        return report

    if grid.dim == 2:
        delta = max(1e-4 * scale, 1e-3 * h)
        plus = shooter.endpoint(shooter.boundary_point(best.p, delta), best.time)
        minus = shooter.endpoint(shooter.boundary_point(best.p, -delta), best.time)
        d_s = (plus - minus) / (2.0 * delta)
        dt = max(1e-4, 10.0 * step)
        d_t = (shooter.endpoint(best.p, best.time + dt) - shooter.endpoint(best.p, best.time - dt)) / (2.0 * dt)
        report.determinant = float(np.linalg.det(np.column_stack([d_s, d_t])))
        if abs(report.determinant) < FOCAL_TOLERANCE * scale:
            report.classification = FOCAL
            return report

    slowness_max = 1.0 / model.c_min
    if best.grazing or report.depth < best.time - 4.0 * h * slowness_max:
        report.classification = DEMI_TANGENT
    logger.debug(f"Regularity of {y.tolist()}: {report.classification} after {len(hits)} hits")
    return report
