"""Plane-wave bookkeeping for 1D layered media.

For c^-2 u_tt = u_xx a pulse of displacement amplitude A hitting an
interface from speed c1 into c2 splits into a transmitted pulse of
amplitude 2 c2 / (c1 + c2) A and a reflected pulse of amplitude
(c2 - c1) / (c1 + c2) A. Energy scales as A^2 / c.
"""
import heapq
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ...validation.exceptions import ConfigSchemaError
from ..geometry.interfaces import PointInterface

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InterfaceCoefficients:
    transmission: float
    reflection: float
    energy_transmission: float
    energy_reflection: float


def interface_coefficients(c1: float, c2: float) -> InterfaceCoefficients:
    """Displacement amplitude and energy coefficients for a pulse going from c1 into c2."""
    total = c1 + c2
    return InterfaceCoefficients(
        transmission=2.0 * c2 / total,
        reflection=(c2 - c1) / total,
        energy_transmission=4.0 * c1 * c2 / total ** 2,
        energy_reflection=((c2 - c1) / total) ** 2,
    )


@dataclass(frozen=True)
class Pulse:
    """A d'Alembert pulse: profile centre, direction of travel (+1/-1), amplitude and history."""
    position: float
    direction: int
    amplitude: float
    bounces: int = 0
    history: Tuple[str, ...] = ()


@dataclass
class LayeredMedium:
    interfaces: List[float]
    speeds: List[float]
    walls: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if len(self.speeds) != len(self.interfaces) + 1:
            raise ConfigSchemaError("A layered medium needs one more speed than interfaces", keys=["speeds"])
        if list(self.interfaces) != sorted(self.interfaces):
            raise ConfigSchemaError("Interfaces must be increasing", keys=["interfaces"])

    @classmethod
    def from_model(cls, model, walls: Optional[Tuple[float, float]] = None) -> 'LayeredMedium':
        positions = sorted(i.at for i in model.interfaces if isinstance(i, PointInterface))
        probes = [positions[0] - 1.0] if positions else [0.0]
        probes += [0.5 * (a + b) for a, b in zip(positions, positions[1:])]
        if positions:
            probes.append(positions[-1] + 1.0)
        speeds = [float(model.evaluate(np.array([[x]]))[0]) for x in probes]
        return cls(interfaces=positions, speeds=speeds, walls=walls)

    def layer(self, x: float, direction: int = 1) -> int:
        side = "right" if direction > 0 else "left"
        return int(np.searchsorted(self.interfaces, x, side=side))

    def speed(self, x: float, direction: int = 1) -> float:
        return self.speeds[self.layer(x, direction)]

    def travel_time(self, a: float, b: float) -> float:
        """Travel time between two points."""
        lo, hi = min(a, b), max(a, b)
        edges = [lo] + [x for x in self.interfaces if lo < x < hi] + [hi]
        return float(sum((r - l) / self.speed(0.5 * (l + r)) for l, r in zip(edges, edges[1:])))

    def _next_event(self, pulse: Pulse) -> Tuple[Optional[float], str]:
        x, d = pulse.position, pulse.direction
        ahead = [s for s in self.interfaces if (s - x) * d > 1e-12]
        target = (min(ahead) if d > 0 else max(ahead)) if ahead else None
        kind = "interface"
        if self.walls is not None:
            wall = self.walls[1] if d > 0 else self.walls[0]
            if target is None or (wall - target) * d < 0.0:
                target, kind = wall, "wall"
        return target, kind

    def _split(self, pulse: Pulse, target: float, kind: str, c: float) -> List[Pulse]:
        if kind == "wall":
            return [Pulse(target, -pulse.direction, -pulse.amplitude, pulse.bounces + 1, pulse.history + ("W",))]
        coeff = interface_coefficients(c, self.speeds[self.layer(target, pulse.direction)])
        return [
            Pulse(target, pulse.direction, coeff.transmission * pulse.amplitude,
                  pulse.bounces, pulse.history + ("T",)),
            Pulse(target, -pulse.direction, coeff.reflection * pulse.amplitude,
                  pulse.bounces + 1, pulse.history + ("R",)),
        ]

    def propagate(self, pulses: Sequence[Pulse], duration: float,
                  min_amplitude: float = 1e-8, max_bounces: int = 50) -> List[Pulse]:
        """Pulses at time `duration`, splitting at every interface crossing."""
        queue = [(0.0, k, p) for k, p in enumerate(pulses)]
        heapq.heapify(queue)
        counter = len(queue)
        out: List[Pulse] = []
        while queue:
            t, _, pulse = heapq.heappop(queue)
            remaining = duration - t
            c = self.speed(pulse.position, pulse.direction)
            target, kind = self._next_event(pulse)
            if target is None or abs(target - pulse.position) / c >= remaining:
                out.append(Pulse(pulse.position + pulse.direction * c * remaining, pulse.direction,
                                 pulse.amplitude, pulse.bounces, pulse.history))
                continue
            t_hit = t + abs(target - pulse.position) / c
            for child in self._split(pulse, target, kind, c):
                if abs(child.amplitude) >= min_amplitude and child.bounces <= max_bounces:
                    counter += 1
                    heapq.heappush(queue, (t_hit, counter, child))
        out.sort(key=lambda p: (p.position, p.direction))
        logger.debug(f"{len(out)} pulses after {duration:g}")
        return out

    def arrivals(self, source: float, direction: int, receiver: float, t_max: float,
                 min_amplitude: float = 1e-6, max_bounces: int = 10) -> List[Tuple[float, float, Tuple[str, ...]]]:
        """(time, amplitude, history) of every pulse passing `receiver` before t_max."""
        found = []
        queue = [(0.0, 0, Pulse(source, direction, 1.0))]
        counter = 1
        while queue:
            t, _, pulse = heapq.heappop(queue)
            c = self.speed(pulse.position, pulse.direction)
            target, kind = self._next_event(pulse)
            end = target if target is not None else pulse.position + pulse.direction * c * (t_max - t)
            if (receiver - pulse.position) * pulse.direction > 0.0 and (end - receiver) * pulse.direction >= 0.0:
                t_rx = t + abs(receiver - pulse.position) / c
                if t_rx <= t_max:
                    found.append((t_rx, pulse.amplitude, pulse.history))
            if target is None:
                continue
            t_hit = t + abs(target - pulse.position) / c
            if t_hit > t_max:
                continue
            for child in self._split(pulse, target, kind, c):
                if abs(child.amplitude) >= min_amplitude and child.bounces <= max_bounces:
                    counter += 1
                    heapq.heappush(queue, (t_hit, counter, child))
        found.sort(key=lambda item: item[0])
        return found
