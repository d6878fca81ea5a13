"""Scattering control: h_{k+1} = h_0 + pi* R pi* R h_k with R = nu o R_2T.

In outside mode every wave field is obtained through `Experiment.observe`
and read only on O and the trace layer, which is all the outside
projection needs. Both modes therefore produce the same iterates bit for
bit.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from ...validation.exceptions import ControlError, SupportViolation, TOutOfRange
from ..geometry.depth import solve_depth
from ..geometry.grid import mask_diameter
from ..projections.harmonic import ProjectionContext, project_inside, project_outside
from ..wave.cauchy import CauchyPair, energy, energy_norm, kinetic_energy, stiffness_form, time_reverse
from ..wave.measurement import Experiment
from ..wave.solver import propagate

logger = logging.getLogger(__name__)

GLASS_BOX = "glassbox"
OUTSIDE = "outside"
MODES = (GLASS_BOX, OUTSIDE)

DEFAULT_K = 8
STOP_DECREMENT = 1e-4


@dataclass
class ControlRun:
    """Partial sums h_0..h_K of the scattering control series and their diagnostics."""
    h0: CauchyPair
    T: float
    mode: str
    context: ProjectionContext = field(repr=False)
    iterates: List[CauchyPair] = field(default_factory=list, repr=False)
    reflected: List[CauchyPair] = field(default_factory=list, repr=False)
    norms: List[float] = field(default_factory=list)
    norms_direct: List[Optional[float]] = field(default_factory=list)
    exterior_energy: List[float] = field(default_factory=list)
    extension_energy: List[float] = field(default_factory=list)
    control_leak: List[float] = field(default_factory=list)
    control_interior: List[Optional[float]] = field(default_factory=list)
    interior_steps: List[float] = field(default_factory=list)
    stopped_early: bool = False

    @property
    def K(self) -> int:
        return len(self.iterates) - 1

    def ratios(self) -> List[float]:
        """Ratio test on successive interior differences."""
        steps = self.interior_steps
        return [b / a if a > 0.0 else 0.0 for a, b in zip(steps, steps[1:])]

    def surrogate_kinetic(self) -> List[float]:
        """Outside-only estimate 1/2 (|h_k|^2 - E_(Theta^c)(R_2T h_k)) of KE(h_DT)."""
        return [
            0.5 * (energy(h) - e_out)
            for h, e_out in zip(self.iterates, self.exterior_energy)
        ]


def check_T(experiment: Experiment, T: float) -> None:
    chain = experiment.chain
    bound = 0.5 * mask_diameter(chain.grid, chain.theta_mask) / experiment.c_min
    if not 0.0 < T < bound:
        raise TOutOfRange(f"T = {T:g} must lie in (0, {bound:.4g}), half the travel-time diameter of Theta")
    if chain.t_max > 0.0 and T > chain.t_max * (1.0 + 1e-12):
        raise TOutOfRange(f"T = {T:g} exceeds t_max = {chain.t_max:g} used to size the grid")


class _Reflector:
    """Applies R = nu o R_2T in one of the two modes and reads the result on O plus the trace layer."""

    def __init__(self, experiment: Experiment, T: float, ctx: ProjectionContext, mode: str):
        self.experiment = experiment
        self.T = T
        self.ctx = ctx
        self.mode = mode
        self.window = ctx.outside | ctx.trace

    def full(self, h: CauchyPair) -> CauchyPair:
        medium = self.experiment.glass_box()
        return time_reverse(propagate(medium, h.with_medium(medium), 2.0 * self.T,
                                      dt=self.experiment.dt, cfl=self.experiment.cfl))

    def __call__(self, h: CauchyPair):
        """(R h read on the window, E_(Theta^c) of R_2T h, full R h or None)."""
        theta_c = ~self.ctx.region
        if self.mode == GLASS_BOX:
            rh = self.full(h)
            visible = rh.masked(self.window)
            return visible, energy(rh, theta_c), rh
        view = self.experiment.observe(h, 2.0 * self.T)
        return time_reverse(view.read(-1, self.window)), view.energy(-1, theta_c), None


def iterate(experiment: Experiment, h0: CauchyPair, T: float, K: int = DEFAULT_K,
            mode: str = GLASS_BOX, solver: str = "direct", tolerance: float = 1e-10,
            early_stop: bool = True) -> ControlRun:
    if mode not in MODES:
        raise ControlError(f"Unknown mode '{mode}', expected one of {MODES}")
    check_T(experiment, T)
    chain = experiment.chain
    if np.any(h0.support() & ~chain.theta_mask):
        raise SupportViolation("Initial data must be supported in Theta")
    medium = experiment.glass_box() if mode == GLASS_BOX else experiment.exterior_medium
    h0 = h0.with_medium(medium)

    ctx = ProjectionContext(chain.grid, chain.theta_mask, solver=solver, tolerance=tolerance)
    reflect = _Reflector(experiment, T, ctx, mode)
    run = ControlRun(h0=h0, T=T, mode=mode, context=ctx)
    theta_c = ~ctx.region

    h = h0
    previous_interior = None
    rh0_full = None
    for k in range(K + 1):
        rh_visible, e_out, rh_full = reflect(h)
        p1 = project_outside(ctx, rh_visible).with_medium(medium)
        phi = ctx.harmonic_extension(np.where(ctx.trace, rh_visible.h0, 0.0))
        norm_sq = energy(h) - energy(p1)
        run.iterates.append(h)
        run.reflected.append(time_reverse(p1))
        run.norms.append(float(np.sqrt(max(norm_sq, 0.0))))
        run.exterior_energy.append(e_out)
        run.extension_energy.append(stiffness_form(chain.grid, phi, phi, theta_c))
        leak = h - h0
        run.control_leak.append(float(np.max(np.abs(np.r_[leak.h0[ctx.region], leak.h1[ctx.region]]), initial=0.0)))

        if rh_full is not None:
            interior = project_inside(ctx, rh_full)
            run.norms_direct.append(energy_norm(interior))
            rh0_full = rh_full if rh0_full is None else rh0_full
            run.control_interior.append(energy_norm((rh_full - rh0_full).masked(ctx.region)))
            if previous_interior is not None:
                run.interior_steps.append(energy_norm(interior - previous_interior))
            previous_interior = interior
            run.norms[-1] = run.norms_direct[-1]
        else:
            run.norms_direct.append(None)
            run.control_interior.append(None)

        logger.debug(f"k={k}: |pibar R h_k| = {run.norms[-1]:.6g}, E_out = {e_out:.6g}")
        if early_stop and k > 0:
            prev = run.norms[-2]
            if prev == 0.0 or abs(prev - run.norms[-1]) < STOP_DECREMENT * prev:
                run.stopped_early = k < K
                break
        if k == K:
            break
        rp1, _, _ = reflect(p1)
        h = h0 + project_outside(ctx, rp1).with_medium(medium)

    logger.info(f"Scattering control ({mode}) finished after {run.K} steps, final norm {run.norms[-1]:.6g}")
    return run


def theta_depth(experiment: Experiment):
    """Travel-time depth relative to Theta, computed with the true medium."""
    chain = experiment.chain
    model = experiment.model
    if model is None:
        raise ControlError("Depth below Theta needs the speed model (glass-box only)")
    return solve_depth(model, chain, chain.theta, speed=experiment.glass_box().speed)


def adt_ground_truth(experiment: Experiment, h0: CauchyPair, T: float, depth=None,
                     solver: str = "direct") -> CauchyPair:
    """h_DT = pibar_T R_T h0, glass-box only."""
    check_T(experiment, T)
    medium = experiment.glass_box()
    depth = theta_depth(experiment) if depth is None else depth
    ctx = ProjectionContext.for_depth(depth, T, solver=solver)
    moved = propagate(medium, h0.with_medium(medium), T, dt=experiment.dt, cfl=experiment.cfl)
    return project_inside(ctx, moved)


def adt_recovered(run: ControlRun, experiment: Experiment) -> List[CauchyPair]:
    """R_(-T) pibar R_2T h_k for every iterate; a glass-box verification step."""
    medium = experiment.glass_box()
    reflect = _Reflector(experiment, run.T, run.context, GLASS_BOX)
    estimates = []
    for h in run.iterates:
        interior = time_reverse(project_inside(run.context, reflect.full(h)))
        estimates.append(propagate(medium, interior, -run.T, dt=experiment.dt, cfl=experiment.cfl))
    return estimates


def energy_report(run: ControlRun, ground_truth: Optional[CauchyPair] = None) -> Dict[str, Any]:
    """Limit norm, ground-truth energies when available, and the SURROGATE kinetic estimate."""
    limit = run.norms[-1]
    report: Dict[str, Any] = {
        "mode": run.mode,
        "T": run.T,
        "K": run.K,
        "stopped_early": run.stopped_early,
        "norms": list(run.norms),
        "limit_norm": limit,
        "exterior_energy": list(run.exterior_energy),
        "ratios": run.ratios(),
        "control_leak": max(run.control_leak, default=0.0),
        "control_interior": list(run.control_interior),
        "ke_surrogate": run.surrogate_kinetic(),
        "pe_extension": list(run.extension_energy),
        "ke_surrogate_tag": "SURROGATE",
    }
    if ground_truth is not None:
        truth_norm = energy_norm(ground_truth)
        report["adt_norm"] = truth_norm
        report["adt_energy"] = truth_norm ** 2
        report["adt_kinetic"] = kinetic_energy(ground_truth)
        report["gap"] = abs(limit - truth_norm) / truth_norm if truth_norm > 0.0 else 0.0
    return report
