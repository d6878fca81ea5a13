"""Energy-orthogonal projections onto data inside and outside a region.

The inside projection keeps h on Theta_t and replaces the displacement
outside by the harmonic extension of its trace; the outside projection is
the remainder. The extension minimises the stiffness form, so both
projections are orthogonal in the discrete energy product up to the linear
solver tolerance.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg, splu

from ...validation.error_codes import LabErrorCode
from ...validation.exceptions import ConfigSchemaError, GridMismatch, SolverDivergence
from ..geometry.depth import DepthField, level_regions
from ..geometry.grid import Grid, neighbour_any
from ..wave.cauchy import CauchyPair

logger = logging.getLogger(__name__)

SOLVERS = ("direct", "cg")


def graph_laplacian(grid: Grid) -> sp.csr_matrix:
    """Unscaled 5-point (3-point in 1D) Dirichlet Laplacian with positive diagonal."""
    blocks = []
    for n in grid.shape:
        blocks.append(sp.diags([-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]))
    if grid.dim == 1:
        return blocks[0].tocsr()
    return sp.kronsum(blocks[1], blocks[0], format="csr")


@dataclass(eq=False)
class ProjectionContext:
    """Discrete Dirichlet problem on the complement of Theta_t, factorised once."""
    grid: Grid
    region: np.ndarray
    solver: str = "direct"
    tolerance: float = 1e-10
    _lu: Optional[object] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.region.shape != self.grid.shape:
            raise GridMismatch(f"Region mask {self.region.shape} does not match {self.grid}")
        if self.solver not in SOLVERS:
            raise ConfigSchemaError(f"Unknown projection solver '{self.solver}'", keys=["projection.solver"])
        self.region = self.region & ~self.grid.boundary_mask

    @classmethod
    def for_depth(cls, depth: DepthField, t: float, **kwargs) -> 'ProjectionContext':
        inside, _ = level_regions(depth, t)
        return cls(grid=depth.grid, region=inside, **kwargs)

    @cached_property
    def outside(self) -> np.ndarray:
        """O: non-boundary nodes outside Theta_t."""
        return ~self.region & ~self.grid.boundary_mask

    @cached_property
    def trace(self) -> np.ndarray:
        """B: nodes of Theta_t next to O."""
        return self.region & neighbour_any(self.outside)

    @cached_property
    def _blocks(self):
        lap = graph_laplacian(self.grid)
        o = np.flatnonzero(self.outside.ravel())
        b = np.flatnonzero(self.trace.ravel())
        k_oo = lap[o][:, o].tocsc()
        k_ob = lap[o][:, b].tocsr()
        return o, b, k_oo, k_ob

    def _solve(self, k_oo, rhs: np.ndarray) -> np.ndarray:
        if self.solver == "direct":
            if self._lu is None:
                self._lu = splu(k_oo)
                logger.debug(f"Factorised Dirichlet block of size {k_oo.shape[0]}")
            x = self._lu.solve(rhs)
        else:
            jacobi = sp.diags(1.0 / k_oo.diagonal())
            x, info = cg(k_oo, rhs, rtol=self.tolerance, atol=0.0, M=jacobi, maxiter=20 * k_oo.shape[0])
            if info != 0:
                raise SolverDivergence(f"CG stopped with info={info}", iterations=info)
        residual = np.linalg.norm(k_oo @ x - rhs)
        scale = np.linalg.norm(rhs)
        if residual > 10.0 * self.tolerance * max(scale, 1e-300):
            raise SolverDivergence(f"Dirichlet residual {residual:.3g} exceeds tolerance for rhs {scale:.3g}")
        return x

    def harmonic_extension(self, h0: np.ndarray) -> np.ndarray:
        """phi on O, h0 on the trace layer, zero elsewhere."""
        if h0.shape != self.grid.shape:
            raise GridMismatch(f"Field {h0.shape} does not match {self.grid}")
        o, b, k_oo, k_ob = self._blocks
        phi = np.zeros(self.grid.size)
        trace = h0.ravel()[b]
        if o.size and np.any(trace != 0.0):
            phi[o] = self._solve(k_oo, -(k_ob @ trace))
        phi[b] = trace
        return phi.reshape(self.grid.shape)


def harmonic_extension(ctx: ProjectionContext, h0: np.ndarray) -> np.ndarray:
    return ctx.harmonic_extension(h0)


def project_inside(ctx: ProjectionContext, h: CauchyPair) -> CauchyPair:
    """h on Theta_t, (phi, 0) outside."""
    phi = ctx.harmonic_extension(h.h0)
    return CauchyPair(
        np.where(ctx.region, h.h0, phi),
        np.where(ctx.region, h.h1, 0.0),
        h.medium,
    )


def project_outside(ctx: ProjectionContext, h: CauchyPair) -> CauchyPair:
    """Zero on Theta_t, h minus the harmonic extension outside.

    Only values on O and the trace layer are read, so the input may come
    from an outside view.
    """
    phi = ctx.harmonic_extension(np.where(ctx.trace, h.h0, 0.0))
    return CauchyPair(
        np.where(ctx.outside, h.h0 - phi, 0.0),
        np.where(ctx.outside, h.h1, 0.0),
        h.medium,
    )


def project_data_space(h: CauchyPair, theta: Optional[np.ndarray] = None) -> CauchyPair:
    """Projection onto admissible Cauchy data, taken as the identity.

    Exact for data supported in Theta; elsewhere an approximation that is
    logged when `theta` is given.
    """
    if theta is not None and np.any(h.support() & ~theta):
        logger.warning(
            f"{LabErrorCode.DATA_OUTSIDE_THETA.name}: data-space projection applied as identity "
            f"to data with {int(np.sum(h.support() & ~theta))} nodes outside Theta"
        )
    return h
