"""Leapfrog solution of u_tt = c^2 Lap_h u with zero Dirichlet data on the grid boundary.

Velocity Verlet (kick-drift-kick) is used so that Cauchy data live at integer
time levels; running it with a negative step inverts it exactly up to
round-off.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ...validation.error_codes import LabErrorCode
from ...validation.exceptions import AccessViolation, CFLViolation, WaveError
from .cauchy import CauchyPair, Medium, kinetic_form, stiffness_form

logger = logging.getLogger(__name__)

DEFAULT_CFL = {1: 0.9, 2: 0.5}


def stable_dt(medium: Medium, cfl: Optional[float] = None) -> float:
    cfl = DEFAULT_CFL[medium.grid.dim] if cfl is None else cfl
    return cfl * medium.grid.spacing / medium.c_max


def time_steps(medium: Medium, s: float, dt: Optional[float] = None,
               cfl: Optional[float] = None) -> Tuple[int, float]:
    """Number of steps and signed step size covering duration s."""
    dt_max = stable_dt(medium, cfl)
    if dt is not None:
        dt = abs(float(dt))
        if dt > dt_max * (1.0 + 1e-12):
            raise CFLViolation(f"dt = {dt:.6g} exceeds the CFL bound {dt_max:.6g}")
        n = int(round(abs(s) / dt))
        if abs(n * dt - abs(s)) > 1e-9 * max(abs(s), dt):
            raise WaveError(f"Duration {s} is not a multiple of dt = {dt}", LabErrorCode.INVALID_PARAMETER)
    else:
        n = int(math.ceil(abs(s) / dt_max - 1e-9))
        dt = abs(s) / n if n > 0 else dt_max
    return n, math.copysign(dt, s) if s != 0 else dt


class LeapfrogStepper:
    def __init__(self, medium: Medium):
        if np.any(medium.hidden):
            raise AccessViolation("Propagation needs the speed everywhere; got a medium with hidden nodes")
        self.medium = medium
        self.grid = medium.grid
        self.c2 = medium.speed ** 2
        self.inv_h2 = 1.0 / medium.grid.spacing ** 2

    def acceleration(self, u: np.ndarray) -> np.ndarray:
        lap = np.zeros_like(u)
        if self.grid.dim == 1:
            lap[1:-1] = u[2:] - 2.0 * u[1:-1] + u[:-2]
        else:
            lap[1:-1, 1:-1] = (
                u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2] - 4.0 * u[1:-1, 1:-1]
            )
        return self.c2 * self.inv_h2 * lap

    def step(self, u, v, a, dt):
        v += 0.5 * dt * a
        u += dt * v
        a = self.acceleration(u)
        v += 0.5 * dt * a
        return u, v, a

    def energies(self, u, v, a, dt) -> Tuple[float, float]:
        """Standard energy and the leapfrog-conserved shadow energy."""
        kinetic = kinetic_form(self.medium, v, v)
        potential = stiffness_form(self.grid, u, u)
        correction = 0.25 * dt * dt * kinetic_form(self.medium, a, a)
        return kinetic + potential, kinetic + potential - correction


@dataclass
class WaveField:
    """Snapshots (u, u_t) at times t0 + k*dt*store_every, plus per-step energies."""
    medium: Medium
    dt: float
    t0: float
    store_every: int
    snapshots: List[Tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    times: List[float] = field(default_factory=list)
    energy: List[float] = field(default_factory=list)
    shadow_energy: List[float] = field(default_factory=list)
    step_times: List[float] = field(default_factory=list)

    def final(self) -> CauchyPair:
        u, v = self.snapshots[-1]
        return CauchyPair(u, v, self.medium)

    def pair(self, index: int) -> CauchyPair:
        u, v = self.snapshots[index]
        return CauchyPair(u, v, self.medium)

    def relative_drift(self, shadow: bool = True) -> float:
        series = np.asarray(self.shadow_energy if shadow else self.energy)
        if series.size == 0 or series[0] == 0.0:
            return 0.0
        return float(np.max(np.abs(series - series[0])) / abs(series[0]))

    def wave_residual(self) -> float:
        """Max relative residual of u(n+1) - 2u(n) + u(n-1) = dt^2 c^2 Lap u(n) over stored triples."""
        if self.store_every != 1 or len(self.snapshots) < 3:
            raise WaveError("Residual check needs every step stored", LabErrorCode.INVALID_PARAMETER)
        stepper = LeapfrogStepper(self.medium)
        worst = 0.0
        for k in range(1, len(self.snapshots) - 1):
            u_prev, u, u_next = (self.snapshots[k + i][0] for i in (-1, 0, 1))
            lhs = u_next - 2.0 * u + u_prev
            rhs = self.dt * self.dt * stepper.acceleration(u)
            scale = max(float(np.max(np.abs(lhs))), float(np.max(np.abs(u))) * 1e-12, 1e-300)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))) / scale)
        return worst


def run(medium: Medium, h: CauchyPair, s: float, dt: Optional[float] = None,
        cfl: Optional[float] = None, store_every: Optional[int] = None,
        track_energy: bool = False) -> WaveField:
    """Integrate for duration s (negative s runs backwards in time)."""
    n, step = time_steps(medium, s, dt, cfl)
    stepper = LeapfrogStepper(medium)
    u = np.array(h.h0, dtype=float)
    v = np.array(h.h1, dtype=float)
    a = stepper.acceleration(u)
    keep = n if store_every is None else max(1, int(store_every))
    field_ = WaveField(medium=medium, dt=step, t0=0.0, store_every=keep)

    def record(k):
        if k % keep == 0 or k == n:
            field_.snapshots.append((u.copy(), v.copy()))
            field_.times.append(k * step)
        if track_energy:
            e, shadow = stepper.energies(u, v, a, step)
            field_.energy.append(e)
            field_.shadow_energy.append(shadow)
            field_.step_times.append(k * step)

    record(0)
    for k in range(1, n + 1):
        u, v, a = stepper.step(u, v, a, step)
        record(k)
    logger.debug(f"Propagated {n} steps of dt={step:.4g} on {medium.grid}")
    return field_


def propagate(medium: Medium, h: CauchyPair, s: float, dt: Optional[float] = None,
              cfl: Optional[float] = None) -> CauchyPair:
    """R_s: Cauchy data at time 0 to Cauchy data at time s."""
    if s == 0.0:
        return CauchyPair(h.h0.copy(), h.h1.copy(), medium)
    return run(medium, h, s, dt=dt, cfl=cfl).final()
