"""Initial Cauchy data described by the `initial` mapping of a config section."""
import logging
from typing import Any, Callable, Dict, Mapping

import numpy as np
from scipy import ndimage

from ...validation.exceptions import ConfigSchemaError
from ..geometry.domain_chain import DomainChain
from ..packets.packets import PacketSpec, bump, packet_cauchy_data
from ..recon.kappa import source_density
from ..wave.cauchy import CauchyPair, Medium

logger = logging.getLogger(__name__)

COMPONENTS = ('h0', 'h1')


def _pair(medium: Medium, values: np.ndarray, component: str) -> CauchyPair:
    if component not in COMPONENTS:
        raise ConfigSchemaError(f"Unknown component '{component}'", keys=['initial.component'])
    zeros = medium.grid.zeros()
    if component == 'h0':
        return CauchyPair(values, zeros, medium)
    return CauchyPair(zeros, values, medium)


def collar_data(spec: Mapping[str, Any], chain: DomainChain, medium: Medium, seed: int) -> CauchyPair:
    """(0, g) with g the mollified indicator of Theta minus Omega."""
    g = source_density(chain, chain.theta, cells=int(spec.get('cells', 2)))
    return _pair(medium, spec.get('amplitude', 1.0) * g, spec.get('component', 'h1'))


def bump_data(spec: Mapping[str, Any], chain: DomainChain, medium: Medium, seed: int) -> CauchyPair:
    """Smooth compactly supported bump of the given radius around `center`."""
    grid = chain.grid
    center = np.asarray(spec['center'], dtype=float)
    radius = float(spec['radius'])
    r = np.linalg.norm(grid.points() - center, axis=1).reshape(grid.shape) / radius
    values = float(spec.get('amplitude', 1.0)) * bump(r)
    values[grid.boundary_mask] = 0.0
    return _pair(medium, values, spec.get('component', 'h0'))


def packet_data(spec: Mapping[str, Any], chain: DomainChain, medium: Medium, seed: int) -> CauchyPair:
    packet = PacketSpec(
        scale=float(spec['scale']),
        center=tuple(float(c) for c in spec['center']),
        direction=tuple(float(d) for d in spec['direction']),
        unit=float(spec.get('unit', 1.0)),
        r0=float(spec.get('r0', 5.5)),
    )
    return packet_cauchy_data(medium, packet)


def noise_data(spec: Mapping[str, Any], chain: DomainChain, medium: Medium, seed: int) -> CauchyPair:
    """Seeded Gaussian noise, smoothed and restricted to Theta minus Omega."""
    grid = chain.grid
    rng = np.random.default_rng(seed)
    support = chain.theta_mask & ~chain.omega_mask
    cells = float(spec.get('smoothing', 2))
    amplitude = float(spec.get('amplitude', 1.0))
    h0, h1 = (
        np.where(support, ndimage.gaussian_filter(rng.standard_normal(grid.shape), cells), 0.0)
        for _ in range(2)
    )
    scale = max(float(np.max(np.abs(h0))), float(np.max(np.abs(h1))), 1e-300)
    return CauchyPair(amplitude * h0 / scale, amplitude * h1 / scale, medium)


BUILDERS: Dict[str, Callable[..., CauchyPair]] = {
    'collar': collar_data,
    'bump': bump_data,
    'packet': packet_data,
    'noise': noise_data,
}


def initial_data(spec: Mapping[str, Any], chain: DomainChain, medium: Medium, seed: int = 0) -> CauchyPair:
    kind = spec.get('type')
    builder = BUILDERS.get(kind)
    if builder is None:
        raise ConfigSchemaError(
            f"Unknown initial data type '{kind}', expected one of {sorted(BUILDERS)}",
            keys=['initial.type'],
        )
    try:
        h = builder(spec, chain, medium, seed)
    except KeyError as e:
        raise ConfigSchemaError(f"Initial data of type '{kind}' needs {e}", keys=[f"initial.{e.args[0]}"]) from e
    logger.debug(f"Built {kind} initial data on {int(h.support().sum())} nodes")
    return h
