from typing import List, Sequence

import numpy as np

from ...validation.exceptions import GridTooCoarse, PNotOnBoundary
from .regions import Disk, Region, Union


def shrink_sequence(chain, p: Sequence[float], j_max: int, eps_1: float = 0.2) -> List[Region]:
    """Nested regions Omega + ball(p, eps_j), eps_j = eps_1 * 2**(1 - j), j = 1..j_max."""
    p = np.asarray(p, dtype=float)
    h = chain.grid.spacing
    scale = max(hi - lo for lo, hi in chain.grid.extent)
    if not chain.omega.on_boundary(p, tolerance=1e-6 * scale):
        raise PNotOnBoundary(f"Point {p.tolist()} is not on the boundary of Omega")
    regions = []
    for j in range(1, j_max + 1):
        eps = eps_1 * 2.0 ** (1 - j)
        if eps < 3.0 * h:
            raise GridTooCoarse(f"Bump radius {eps:.4g} at j={j} is below 3h = {3.0 * h:.4g}")
        regions.append(Union([chain.omega, Disk(p, eps)]))
    return regions
