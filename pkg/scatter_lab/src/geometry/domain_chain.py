import logging
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from scipy import ndimage

from ...validation.exceptions import ChainContainmentError, UpsilonTooSmall
from .depth import solve_depth
from .grid import Grid, neighbour_any
from .regions import Region

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DomainChain:
    """Hidden region Omega inside Theta inside the ambient grid box Upsilon."""
    omega: Region
    theta: Region
    grid: Grid
    t_max: float = 0.0

    @cached_property
    def omega_mask(self) -> np.ndarray:
        return self.omega.mask(self.grid)

    @cached_property
    def theta_mask(self) -> np.ndarray:
        return self.theta.mask(self.grid) & ~self.grid.boundary_mask

    @cached_property
    def exterior_mask(self) -> np.ndarray:
        return ~self.omega_mask

    @cached_property
    def hidden_mask(self) -> np.ndarray:
        """Omega nodes off its transition layer; the layer itself is observable."""
        return self.omega_mask & ~neighbour_any(~self.omega_mask)

    def with_theta(self, theta: Region) -> 'DomainChain':
        return replace(self, theta=theta)

    def validate(self, model=None) -> 'DomainChain':
        """Check containment on the grid and, given a model, the 2*t_max travel-time margin."""
        structure = ndimage.generate_binary_structure(self.grid.dim, 1)
        omega_closure = ndimage.binary_dilation(self.omega_mask, structure)
        if np.any(omega_closure & ~self.theta_mask):
            raise ChainContainmentError("Omega plus one cell is not contained in Theta")
        theta_closure = ndimage.binary_dilation(self.theta.mask(self.grid), structure)
        if np.any(theta_closure & self.grid.boundary_mask):
            raise ChainContainmentError("Theta touches the outer boundary of the grid")
        if model is not None and self.t_max > 0.0:
            depth = solve_depth(model, self, self.theta)
            margin = float(-depth.values[self.grid.boundary_mask].max())
            if margin <= 2.0 * self.t_max:
                raise UpsilonTooSmall(
                    f"Travel time from the grid boundary to Theta is {margin:.4g}, "
                    f"needs more than 2*t_max = {2.0 * self.t_max:.4g}"
                )
            logger.debug(f"Chain margin {margin:.4g} > {2.0 * self.t_max:.4g}")
        return self
