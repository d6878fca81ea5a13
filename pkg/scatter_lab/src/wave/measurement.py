"""The outside measurement operator and the firewall around it.

Inverse-side code never holds the true medium. It gets an `Experiment`,
submits exterior-supported Cauchy data and receives an `OutsideView` whose
interior values are NaN and whose query methods refuse any read that
touches the hidden region.
"""
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ...validation.exceptions import AccessViolation, SupportViolation
from ..geometry.domain_chain import DomainChain
from ..geometry.grid import Grid, neighbour_any
from .cauchy import CauchyPair, Medium, Mask, _weights, kinetic_form, stiffness_form
from .solver import run

logger = logging.getLogger(__name__)


@dataclass
class OutsideView:
    """Wave field snapshots restricted to the complement of the hidden region."""
    medium: Medium
    hidden: np.ndarray
    dt: float
    times: List[float]
    _snapshots: List[Tuple[np.ndarray, np.ndarray]] = field(repr=False)

    @property
    def grid(self) -> Grid:
        return self.medium.grid

    def __len__(self) -> int:
        return len(self._snapshots)

    def _check(self, mask: np.ndarray, what: str) -> None:
        if np.any(mask & self.hidden):
            raise AccessViolation(f"{what} touches {int(np.sum(mask & self.hidden))} hidden nodes")

    def read(self, index: int = -1, mask: Optional[np.ndarray] = None) -> CauchyPair:
        """Snapshot `index` as Cauchy data, zero outside `mask` (default: all visible nodes)."""
        if mask is None:
            mask = ~self.hidden
        self._check(mask, "Read mask")
        u, v = self._snapshots[index]
        return CauchyPair(np.where(mask, u, 0.0), np.where(mask, v, 0.0), self.medium)

    def value(self, index: int, point: Sequence[float]) -> Tuple[float, float]:
        node = self.grid.nearest_index(point)
        if self.hidden[node]:
            raise AccessViolation(f"Node {node} near {list(point)} lies inside the hidden region")
        u, v = self._snapshots[index]
        return float(u[node]), float(v[node])

    def energy(self, index: int = -1, W: Mask = None) -> float:
        """E_W of snapshot `index`; W and its neighbours must be visible."""
        w = _weights(self.grid, W)
        if w is None:
            raise AccessViolation("Whole-domain energy needs the hidden region")
        support = w > 0.0
        self._check(support | neighbour_any(support), "Energy window")
        pair = self.read(index, support | neighbour_any(support))
        return stiffness_form(self.grid, pair.h0, pair.h0, W) + kinetic_form(self.medium, pair.h1, pair.h1, W)


@dataclass(frozen=True, eq=False)
class Experiment:
    """True medium plus domain chain; the only path to data on the inverse side is `observe`."""
    chain: DomainChain
    truth: Medium = field(repr=False)
    cfl: Optional[float] = None
    dt: Optional[float] = None
    model: Optional[object] = field(default=None, repr=False)

    @classmethod
    def from_model(cls, model, chain: DomainChain, cfl: Optional[float] = None,
                   dt: Optional[float] = None) -> 'Experiment':
        return cls(chain=chain, truth=Medium.from_model(model, chain.grid), cfl=cfl, dt=dt, model=model)

    @property
    def grid(self) -> Grid:
        return self.chain.grid

    @cached_property
    def exterior_medium(self) -> Medium:
        return self.truth.exterior(self.chain.hidden_mask)

    @property
    def c_min(self) -> float:
        if self.model is not None:
            return float(self.model.c_min)
        return float(np.nanmin(self.exterior_medium.speed))

    def with_theta(self, theta) -> 'Experiment':
        return replace(self, chain=self.chain.with_theta(theta))

    def glass_box(self) -> Medium:
        """The true medium, for verification runs only."""
        return self.truth

    def observe(self, h: CauchyPair, horizon: float, store_every: Optional[int] = None) -> OutsideView:
        omega = self.chain.omega_mask
        if np.any(h.support() & omega):
            raise SupportViolation(
                f"Cauchy data are nonzero on {int(np.sum(h.support() & omega))} nodes inside Omega"
            )
        hidden = self.chain.hidden_mask
        field_ = run(self.truth, h.with_medium(self.truth), horizon,
                     dt=self.dt, cfl=self.cfl, store_every=store_every)
        snapshots = [
            (np.where(hidden, np.nan, u), np.where(hidden, np.nan, v)) for u, v in field_.snapshots
        ]
        logger.debug(f"Observed {len(snapshots)} snapshots over horizon {horizon:.4g}")
        return OutsideView(
            medium=self.exterior_medium,
            hidden=hidden,
            dt=field_.dt,
            times=list(field_.times),
            _snapshots=snapshots,
        )


def observe(model, chain: DomainChain, h: CauchyPair, horizon: float, **kwargs) -> OutsideView:
    return Experiment.from_model(model, chain, **kwargs).observe(h, horizon)
