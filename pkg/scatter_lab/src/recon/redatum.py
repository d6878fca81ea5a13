"""Redatuming to a smaller hidden region and the two-stage layer-stripping run built on it."""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import NearestNDInterpolator

from ...validation.exceptions import ChainContainmentError, GridMismatch, SpeedMissing
from ..control.scattering import DEFAULT_K, GLASS_BOX
from ..geometry.domain_chain import DomainChain
from ..geometry.regions import Region
from ..wave.cauchy import CauchyPair, Medium
from ..wave.measurement import Experiment, OutsideView
from .kappa import ReconstructedChart, build_chart

logger = logging.getLogger(__name__)


def redatum_experiment(experiment: Experiment, omega_tilde: Region,
                       speed_patch: Optional[np.ndarray]) -> Experiment:
    """Experiment whose hidden region is omega_tilde, with the speed on Omega minus omega_tilde supplied."""
    chain = experiment.chain
    grid = chain.grid
    tilde_mask = omega_tilde.mask(grid)
    if np.any(tilde_mask & ~chain.omega_mask):
        raise ChainContainmentError(
            f"{omega_tilde!r} leaves Omega on {int(np.sum(tilde_mask & ~chain.omega_mask))} nodes"
        )
    shell = chain.omega_mask & ~tilde_mask
    truth = experiment.glass_box()
    if shell.any():
        if speed_patch is None:
            raise SpeedMissing("Redatuming needs the speed between the two hidden regions")
        if speed_patch.shape != grid.shape:
            raise GridMismatch(f"Speed patch {speed_patch.shape} does not match {grid}")
        if not np.all(np.isfinite(speed_patch[shell])):
            raise SpeedMissing(f"Speed patch is missing on {int(np.sum(~np.isfinite(speed_patch[shell])))} nodes")
        speed = np.where(shell, speed_patch, truth.speed)
    else:
        speed = truth.speed
    tilde_chain = DomainChain(omega=omega_tilde, theta=chain.theta, grid=grid, t_max=chain.t_max)
    tilde_chain.validate(experiment.model)
    logger.info(f"Redatumed to {omega_tilde!r}: {int(shell.sum())} nodes of speed supplied")
    return Experiment(chain=tilde_chain, truth=Medium(grid, speed), cfl=experiment.cfl, dt=experiment.dt,
                      model=experiment.model)


def redatum(experiment: Experiment, omega_tilde: Region, speed_patch: Optional[np.ndarray],
            h: CauchyPair, horizon: float, store_every: Optional[int] = None) -> OutsideView:
    """Outside view with respect to omega_tilde for data h supported outside it."""
    return redatum_experiment(experiment, omega_tilde, speed_patch).observe(h, horizon, store_every)


def speed_patch_from_chart(chart: ReconstructedChart, grid, mask: np.ndarray) -> np.ndarray:
    """Nearest-sample interpolation of reconstructed speeds onto `mask`, NaN elsewhere."""
    usable = [s for s in chart.samples if np.isfinite(s.c_est) and not s.flagged]
    if not usable:
        raise SpeedMissing("No unflagged chart samples to build a speed patch from")
    interp = NearestNDInterpolator(np.array([s.y for s in usable]), np.array([s.c_est for s in usable]))
    patch = np.full(grid.shape, np.nan)
    patch[mask] = interp(grid.points()[mask.ravel()])
    return patch


@dataclass
class TwoStageResult:
    shallow: ReconstructedChart
    patch: np.ndarray
    deep: ReconstructedChart
    experiment: Experiment


def two_stage_reconstruction(experiment: Experiment, p: Sequence[float], shallow_times: Sequence[float],
                             omega_tilde: Region, p_tilde: Sequence[float], deep_times: Sequence[float],
                             j_max: int, K: int = DEFAULT_K, mode: str = GLASS_BOX, eps_1: float = 0.2,
                             workers: int = 1, **kwargs) -> TwoStageResult:
    """Reconstruct shallow speeds below p, redatum to omega_tilde, reconstruct below p_tilde."""
    shallow = build_chart(experiment, [p], shallow_times, j_max, K=K, mode=mode, eps_1=eps_1,
                          workers=workers, **kwargs)
    shell = experiment.chain.omega_mask & ~omega_tilde.mask(experiment.grid)
    patch = speed_patch_from_chart(shallow, experiment.grid, shell)
    second = redatum_experiment(experiment, omega_tilde, patch)
    deep = build_chart(second, [p_tilde], deep_times, j_max, K=K, mode=mode, eps_1=eps_1,
                       workers=workers, **kwargs)
    return TwoStageResult(shallow=shallow, patch=patch, deep=deep, experiment=second)
