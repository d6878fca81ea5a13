import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import skfmm
from scipy.interpolate import RegularGridInterpolator

from ...validation.error_codes import LabErrorCode
from ...validation.exceptions import GeometryError, UnresolvedBoundary
from .grid import Grid
from .regions import Region

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DepthField:
    """Signed travel-time depth relative to a region: positive inside, negative outside."""
    values: np.ndarray
    theta_ref: Region
    grid: Grid

    def at(self, points: Sequence[float]) -> np.ndarray:
        interp = RegularGridInterpolator(self.grid.axes(), self.values, method="linear")
        pts = np.asarray(points, dtype=float).reshape(-1, self.grid.dim)
        return interp(pts)

    @property
    def max_depth(self) -> float:
        return float(self.values.max())


def solve_depth(model, chain, region: Region, speed: Optional[np.ndarray] = None) -> DepthField:
    """First-order fast marching of |grad d| = 1/c seeded on the region boundary.

    `speed` overrides the nodal speed sampled from `model`; NaN entries (a
    hidden interior) are replaced by c_min since the two sides of the zero
    level set are marched independently.
    """
    grid = chain.grid
    h = grid.spacing
    phi = np.clip(region.levelset_on(grid), -1e6, 1e6)
    if phi.max() < 2.0 * h or phi.min() > -2.0 * h:
        raise UnresolvedBoundary(
            f"{region!r} is not resolved on {grid}: needs at least 4 cells on each side of its boundary"
        )
    if speed is None:
        speed = model.sample(grid)
    speed = np.where(np.isfinite(speed), speed, model.c_min)
    travel = skfmm.travel_time(phi, speed, dx=h, order=1)
    travel = np.abs(np.ma.getdata(travel))
    values = np.where(phi > 0.0, travel, -travel)
    logger.debug(f"Depth of {region!r}: max {values.max():.4g}, min {values.min():.4g}")
    return DepthField(values=values, theta_ref=region, grid=grid)


def level_regions(depth: DepthField, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """Masks of {d > t} and {d < t}."""
    if t < 0.0:
        raise GeometryError(f"Level t must be non-negative, got {t}", LabErrorCode.INVALID_PARAMETER)
    return depth.values > t, depth.values < t
