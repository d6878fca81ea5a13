import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union as TypingUnion

import numpy as np
import sympy
import yaml

from ...validation.exceptions import (
    ConfigSchemaError,
    MalformedInterface,
    OutOfDomain,
    OverlappingRegions,
    SpeedOutOfBounds,
)
from .grid import Grid
from .interfaces import Interface, interface_from_config
from .regions import Box, Region, region_from_config

logger = logging.getLogger(__name__)

_SYMBOLS = {1: sympy.symbols("x", real=True), 2: sympy.symbols("x y", real=True)}


class SpeedFunction:
    """Smooth speed c_j(x) from a closed-form expression, evaluable on all of space."""

    def __init__(self, expression: TypingUnion[str, float], dim: int):
        self.expression = str(expression)
        self.dim = dim
        self._compile()

    def _compile(self) -> None:
        symbols = _SYMBOLS[self.dim]
        symbols = (symbols,) if self.dim == 1 else tuple(symbols)
        try:
            expr = sympy.sympify(self.expression, locals={str(s): s for s in symbols})
        except (sympy.SympifyError, TypeError) as e:
            raise ConfigSchemaError(f"Cannot parse speed '{self.expression}': {e}", keys=["speed"])
        unknown = expr.free_symbols - set(symbols)
        if unknown:
            raise ConfigSchemaError(
                f"Speed '{self.expression}' uses unknown symbols {sorted(map(str, unknown))}",
                keys=["speed"],
            )
        self.is_constant = not expr.free_symbols
        self._f = sympy.lambdify(symbols, expr, modules="numpy")
        self._grad = [sympy.lambdify(symbols, sympy.diff(expr, s), modules="numpy") for s in symbols]

    def __getstate__(self):
        return {"expression": self.expression, "dim": self.dim}

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._compile()

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        out = self._f(*pts.T)
        return np.broadcast_to(np.asarray(out, dtype=float), (len(pts),)).copy()

    def gradient(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        cols = [np.broadcast_to(np.asarray(g(*pts.T), dtype=float), (len(pts),)) for g in self._grad]
        return np.stack(cols, axis=-1)

    def __repr__(self):
        return f"SpeedFunction({self.expression!r})"


@dataclass
class SpeedRegion:
    name: str
    indicator: Region
    speed: SpeedFunction


@dataclass
class SpeedModel:
    """Piecewise-smooth speed: smooth pieces on disjoint regions separated by interfaces."""
    dim: int
    regions: List[SpeedRegion]
    interfaces: List[Interface]
    c_min: float
    c_max: float
    extent: Optional[Sequence[Sequence[float]]] = None
    boundary_tolerance: float = 1e-9
    source: Dict[str, Any] = field(default_factory=dict)

    def levelsets(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        return np.stack([r.indicator.levelset(pts) for r in self.regions], axis=-1)

    def region_id(self, points: np.ndarray) -> np.ndarray:
        return np.argmax(self.levelsets(points), axis=-1)

    def speeds(self, points: np.ndarray) -> np.ndarray:
        """Every smooth piece evaluated at every point, shape (N, regions)."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        return np.stack([r.speed(pts) for r in self.regions], axis=-1)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Lower semicontinuous speed: on an interface the smaller one-sided value."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        candidates = self.levelsets(pts) >= -self.boundary_tolerance
        if not np.all(candidates.any(axis=1)):
            bad = pts[~candidates.any(axis=1)][0]
            raise OutOfDomain(f"Point {bad.tolist()} lies in no region")
        return np.where(candidates, self.speeds(pts), np.inf).min(axis=1)

    def gradient(self, point: np.ndarray, region: int) -> np.ndarray:
        return self.regions[region].speed.gradient(point)[0]

    def is_piecewise_constant(self) -> bool:
        return all(r.speed.is_constant for r in self.regions)

    def sample(self, grid: Grid) -> np.ndarray:
        """Nodal speed from the harmonic mean of c^-2 over the node and its half-step neighbours."""
        base = grid.points()
        offsets = [np.zeros(self.dim)]
        for axis in range(self.dim):
            for sign in (-0.5, 0.5):
                e = np.zeros(self.dim)
                e[axis] = sign * grid.spacing
                offsets.append(e)
        inv_sq = np.zeros(len(base))
        for e in offsets:
            inv_sq += self.evaluate(base + e) ** -2
        inv_sq /= len(offsets)
        return (1.0 / np.sqrt(inv_sq)).reshape(grid.shape)


def eval_speed(model: SpeedModel, x: TypingUnion[float, Sequence[float]]) -> float:
    point = np.atleast_1d(np.asarray(x, dtype=float))
    if point.size != model.dim:
        raise OutOfDomain(f"Point {point.tolist()} has dimension {point.size}, model is {model.dim}D")
    if model.extent is not None and not Box(*zip(*model.extent)).levelset(point[None])[0] >= -1e-12:
        raise OutOfDomain(f"Point {point.tolist()} outside model extent {model.extent}")
    return float(model.evaluate(point[None])[0])


def _validation_points(dim: int, extent, count: int) -> np.ndarray:
    axes = [np.linspace(lo, hi, count) for lo, hi in extent]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def validate_speed_model(model: SpeedModel) -> None:
    extent = model.extent or [[-1.0, 1.0]] * model.dim
    scale = max(hi - lo for lo, hi in extent)
    tol = 1e-9 * scale
    pts = _validation_points(model.dim, extent, 401 if model.dim == 1 else 81)

    levels = model.levelsets(pts)
    inside = levels > tol
    overlap = inside.sum(axis=1) > 1
    if np.any(overlap):
        bad = pts[overlap][0]
        names = [model.regions[k].name for k in np.flatnonzero(inside[overlap][0])]
        raise OverlappingRegions(f"Regions {names} overlap at {bad.tolist()}")
    uncovered = ~(levels >= -tol).any(axis=1)
    if np.any(uncovered):
        raise OverlappingRegions(f"Point {pts[uncovered][0].tolist()} belongs to no region")

    speeds = model.speeds(pts)
    if not np.all(np.isfinite(speeds)):
        raise SpeedOutOfBounds("A smooth speed piece is not finite on the model extent")
    values = model.evaluate(pts)
    lo, hi = float(values.min()), float(values.max())
    if lo < model.c_min - 1e-12 or hi > model.c_max + 1e-12:
        raise SpeedOutOfBounds(
            f"Speed range [{lo:g}, {hi:g}] exceeds bounds [{model.c_min:g}, {model.c_max:g}]"
        )

    delta = 1e-6 * scale
    for k, interface in enumerate(model.interfaces):
        if interface.dim != model.dim:
            raise MalformedInterface(f"Interface {k} is {interface.dim}D in a {model.dim}D model")
        for other in model.interfaces[k + 1:]:
            if np.min(other.distance(interface.samples(64))) <= tol:
                raise MalformedInterface(f"Interfaces '{interface.name}' and '{other.name}' intersect")
        for point in interface.samples(16):
            n = interface.normal(point)
            ids = model.region_id(np.array([point + delta * n, point - delta * n]))
            if ids[0] == ids[1]:
                raise MalformedInterface(
                    f"Interface '{interface.name}' does not separate regions near {point.tolist()}"
                )
    logger.debug(f"Speed model validated: {len(model.regions)} regions, {len(model.interfaces)} interfaces")


def build_speed_model(config: Dict[str, Any]) -> SpeedModel:
    missing = [key for key in ("dim", "regions", "bounds") if key not in config]
    if missing:
        raise ConfigSchemaError(f"Model description lacks {missing}", keys=missing)
    dim = int(config["dim"])
    if dim not in (1, 2):
        raise ConfigSchemaError(f"Model dim must be 1 or 2, got {dim}", keys=["dim"])

    regions: List[SpeedRegion] = []
    specs = list(config["regions"])
    for k, spec in enumerate(specs):
        indicator_spec = dict(spec.get("indicator", {"type": "rest"}))
        indicator_spec.setdefault("dim", dim)
        if indicator_spec.get("type") == "rest":
            others = [region_from_config(s.get("indicator", {})) for s in specs if s is not spec]
            indicator = region_from_config(indicator_spec, siblings=others)
        else:
            indicator = region_from_config(indicator_spec)
        regions.append(SpeedRegion(
            name=spec.get("name", f"region{k}"),
            indicator=indicator,
            speed=SpeedFunction(spec["speed"], dim),
        ))

    interfaces = [
        interface_from_config(spec, name=f"interface{k}")
        for k, spec in enumerate(config.get("interfaces", []) or [])
    ]
    bounds = config["bounds"]
    model = SpeedModel(
        dim=dim,
        regions=regions,
        interfaces=interfaces,
        c_min=float(bounds["c_min"]),
        c_max=float(bounds["c_max"]),
        extent=config.get("extent"),
        source=dict(config),
    )
    validate_speed_model(model)
    logger.info(f"Built {dim}D speed model with {len(regions)} regions")
    return model


def load_speed_model(path: TypingUnion[str, Path]) -> SpeedModel:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Model file not found: {path}")
    with open(path, 'r') as file:
        data = yaml.safe_load(file)
    return build_speed_model(data)


def homogeneous_model(dim: int, speed: float = 1.0, extent=None) -> SpeedModel:
    """Constant speed everywhere, no interfaces."""
    return build_speed_model({
        "dim": dim,
        "extent": extent,
        "bounds": {"c_min": speed, "c_max": speed},
        "regions": [{"name": "background", "indicator": {"type": "rest"}, "speed": speed}],
    })
