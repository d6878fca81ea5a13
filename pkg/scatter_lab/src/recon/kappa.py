"""Harmonic inner products of the almost direct transmission and the charts built from them.

For a harmonic f the pairing of R_T-propagated data with (0, f) can be
written in terms of the control iterates and their exterior reflections
only, so the ratio kappa(g, x_i) / kappa(g, 1) is computable from outside
measurements. As the source region shrinks to a boundary point p, that
ratio tends to the Euclidean coordinates of the point at travel-time depth
T below p.
"""
import logging
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from ...validation.error_codes import LabErrorCode
from ...validation.exceptions import (
    DenominatorNearZero,
    InsufficientSamples,
    NonConvergent,
    NotHarmonic,
    ReconstructionError,
    SupportViolation,
)
from ..control.scattering import DEFAULT_K, GLASS_BOX, ControlRun, iterate
from ..geometry.grid import Grid
from ..geometry.shrink import shrink_sequence
from ..projections.harmonic import graph_laplacian, project_data_space
from ..wave.cauchy import CauchyPair, kinetic_form, stiffness_form
from ..wave.measurement import Experiment

logger = logging.getLogger(__name__)

HARMONIC_TOLERANCE = 1e-8
DENOMINATOR_TOLERANCE = 1e-10
CONVERGENCE_TOLERANCE = 1e-3
BOUNDS_SLACK = 0.1
# relative disagreement of the one-sided slopes that marks a sample straddling an interface
KINK_TOLERANCE = 0.2


@dataclass(frozen=True, eq=False)
class HarmonicPair:
    """Harmonic Cauchy data (f, g); f + t g solves the wave equation for every speed."""
    f: np.ndarray
    g: np.ndarray
    grid: Grid

    def __post_init__(self):
        for name, values in (("f", self.f), ("g", self.g)):
            check_harmonic(self.grid, values, name)

    @classmethod
    def velocity(cls, grid: Grid, f: np.ndarray) -> 'HarmonicPair':
        return cls(f=np.zeros(grid.shape), g=f, grid=grid)


def check_harmonic(grid: Grid, values: np.ndarray, name: str = "f") -> None:
    """Raise NotHarmonic unless the 5-point Laplacian vanishes on all interior nodes."""
    lap = (graph_laplacian(grid) @ values.ravel()).reshape(grid.shape)
    residual = float(np.max(np.abs(lap[~grid.boundary_mask]), initial=0.0))
    scale = 2.0 * grid.dim * max(float(np.max(np.abs(values))), 1e-300)
    if residual > HARMONIC_TOLERANCE * scale:
        raise NotHarmonic(f"Field {name} has Laplacian residual {residual:.3g} (scale {scale:.3g})")


def coordinate_probes(grid: Grid) -> List[np.ndarray]:
    """1 and the coordinate functions x_i; all discretely harmonic."""
    return [np.ones(grid.shape)] + [np.array(c, dtype=float) for c in grid.coords]


def source_density(chain, theta_j, cells: int = 2) -> np.ndarray:
    """Indicator of Theta_j minus Omega, mollified over `cells` grid cells inside its support."""
    grid = chain.grid
    mask = theta_j.mask(grid) & ~chain.omega_mask & ~grid.boundary_mask
    core = ndimage.binary_erosion(mask, iterations=cells)
    if not core.any():
        return mask.astype(float)
    smooth = ndimage.uniform_filter(core.astype(float), size=2 * cells + 1, mode="constant")
    return np.where(mask, smooth, 0.0)


def bracket(run: ControlRun, k: int, harmonic: HarmonicPair) -> float:
    """<h_k, (f - T g, g)> - <pi* R_2T h_k, (f + T g, g)>."""
    T = run.T
    h = run.iterates[k]
    r = run.reflected[k]
    grid = h.grid
    value = stiffness_form(grid, h.h0, harmonic.f - T * harmonic.g)
    value += kinetic_form(h.medium, h.h1, harmonic.g)
    value -= stiffness_form(grid, r.h0, harmonic.f + T * harmonic.g)
    value -= kinetic_form(r.medium, r.h1, harmonic.g)
    return value


def kappa_sequence(run: ControlRun, f: np.ndarray) -> np.ndarray:
    harmonic = HarmonicPair.velocity(run.h0.grid, f)
    return np.array([bracket(run, k, harmonic) for k in range(len(run.iterates))])


def kappa_limit(sequence: np.ndarray) -> float:
    """Last bracket, after checking that its Cauchy differences settle."""
    if len(sequence) >= 3:
        steps = np.abs(np.diff(sequence))
        scale = CONVERGENCE_TOLERANCE * float(np.max(np.abs(sequence)))
        if steps[-1] > steps[0] and steps[-1] > scale:
            raise NonConvergent(
                f"Bracket differences grow from {steps[0]:.3g} to {steps[-1]:.3g}",
                sequence=sequence.tolist(),
            )
    return float(sequence[-1])


def control_for_density(experiment: Experiment, theta_j, g: np.ndarray, T: float, K: int,
                        mode: str, **kwargs) -> ControlRun:
    local = experiment.with_theta(theta_j)
    medium = local.glass_box() if mode == GLASS_BOX else local.exterior_medium
    if np.any((g != 0.0) & ~local.chain.theta_mask):
        raise SupportViolation("Source density must be supported in Theta_j")
    h0 = project_data_space(CauchyPair(local.grid.zeros(), g, medium), local.chain.theta_mask)
    return iterate(local, h0, T, K=K, mode=mode, **kwargs)


def kappa(experiment: Experiment, theta_j, g: np.ndarray, f: np.ndarray, T: float,
          K: int = DEFAULT_K, mode: str = GLASS_BOX, **kwargs) -> float:
    """kappa(g, f) = <pibar_T R_T (0, g), (0, f)> from the control series on Theta_j."""
    check_harmonic(experiment.grid, f)
    if not np.any(g):
        return 0.0
    run = control_for_density(experiment, theta_j, g, T, K, mode, **kwargs)
    return kappa_limit(kappa_sequence(run, f))


@dataclass
class PointEstimate:
    """kappa-ratio coordinates for each shrinking level j = 1..j_max."""
    p: np.ndarray
    T: float
    points: List[np.ndarray] = field(default_factory=list)
    denominators: List[float] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)
    K: int = DEFAULT_K

    @property
    def y(self) -> np.ndarray:
        return self.points[-1]

    @property
    def j_max(self) -> int:
        return len(self.points)


def _level_estimate(args) -> Tuple[np.ndarray, float, float]:
    experiment, theta_j, T, K, mode, kwargs = args
    grid = experiment.grid
    g = source_density(experiment.chain, theta_j)
    run = control_for_density(experiment, theta_j, g, T, K, mode, **kwargs)
    probes = coordinate_probes(grid)
    sequences = [kappa_sequence(run, f) for f in probes]
    denominator = kappa_limit(sequences[0])
    scale = kinetic_form(run.h0.medium, g, np.ones(grid.shape))
    if abs(denominator) < DENOMINATOR_TOLERANCE * max(scale, 1e-300):
        raise DenominatorNearZero(f"kappa(g, 1) = {denominator:.3g} against scale {scale:.3g}")
    y = np.array([kappa_limit(s) / denominator for s in sequences[1:]])
    residual = float(abs(sequences[0][-1] - sequences[0][-2])) / abs(denominator) if len(sequences[0]) > 1 else 0.0
    return y, denominator, residual


def reconstruct_point(experiment: Experiment, p: Sequence[float], T: float, j_max: int,
                      K: int = DEFAULT_K, mode: str = GLASS_BOX, eps_1: float = 0.2,
                      workers: int = 1, **kwargs) -> PointEstimate:
    """Euclidean point at travel-time depth T below the boundary point p."""
    regions = shrink_sequence(experiment.chain, p, j_max, eps_1=eps_1)
    tasks = [(experiment, theta_j, T, K, mode, kwargs) for theta_j in regions]
    if workers > 1:
        with Pool(workers) as pool:
            results = pool.map(_level_estimate, tasks)
    else:
        results = [_level_estimate(task) for task in tasks]
    estimate = PointEstimate(p=np.asarray(p, dtype=float), T=T, K=K)
    for y, denominator, residual in results:
        estimate.points.append(y)
        estimate.denominators.append(denominator)
        estimate.residuals.append(residual)
    logger.info(f"Point at depth {T:g} below {list(p)}: {estimate.y.tolist()}")
    return estimate


@dataclass
class SpeedProfile:
    times: np.ndarray
    speeds: np.ndarray
    flagged: np.ndarray


def reconstruct_speed(times: Sequence[float], points: Sequence[Sequence[float]],
                      c_min: Optional[float] = None, c_max: Optional[float] = None) -> SpeedProfile:
    """c = |dPhi/dT| by centred differences, one-sided at the ends.

    Speeds more than BOUNDS_SLACK outside [c_min, c_max] are flagged, and so are
    interior samples whose backward and forward slopes disagree by more than
    KINK_TOLERANCE: the centred difference there blends two layers.
    """
    times = np.asarray(times, dtype=float)
    points = np.asarray(points, dtype=float).reshape(len(times), -1)
    if len(times) < 3:
        raise InsufficientSamples(f"Speed needs at least 3 samples along the ray, got {len(times)}")
    if np.any(np.diff(times) <= 0.0):
        raise ReconstructionError("Chart samples must have strictly increasing T", LabErrorCode.INVALID_PARAMETER)
    speeds = np.linalg.norm(np.gradient(points, times, axis=0, edge_order=1), axis=1)
    out_of_bounds = np.zeros(len(times), dtype=bool)
    if c_min is not None:
        out_of_bounds |= speeds < c_min * (1.0 - BOUNDS_SLACK)
    if c_max is not None:
        out_of_bounds |= speeds > c_max * (1.0 + BOUNDS_SLACK)

    slopes = np.linalg.norm(np.diff(points, axis=0), axis=1) / np.diff(times)
    backward, forward = slopes[:-1], slopes[1:]
    kinks = np.zeros(len(times), dtype=bool)
    kinks[1:-1] = np.abs(forward - backward) > KINK_TOLERANCE * np.maximum(np.maximum(forward, backward), 1e-300)

    flagged = out_of_bounds | kinks
    if out_of_bounds.any():
        logger.warning(
            f"{LabErrorCode.SPEED_FLAGGED.name}: {int(out_of_bounds.sum())} speed samples outside "
            f"[{c_min}, {c_max}]"
        )
    if kinks.any():
        logger.warning(
            f"{LabErrorCode.SPEED_FLAGGED.name}: samples at T = {times[kinks].tolist()} straddle a speed jump"
        )
    return SpeedProfile(times=times, speeds=speeds, flagged=flagged)


@dataclass
class ChartSample:
    p_index: int
    p: np.ndarray
    T: float
    y: np.ndarray
    c_est: float = float("nan")
    flagged: bool = False
    j_max: int = 0
    K: int = 0
    residual: float = 0.0


@dataclass
class ReconstructedChart:
    """Samples (p, T) -> (y, c_est) with per-sample provenance."""
    samples: List[ChartSample] = field(default_factory=list)

    def along(self, p_index: int) -> List[ChartSample]:
        return sorted((s for s in self.samples if s.p_index == p_index), key=lambda s: s.T)

    def profiles(self) -> Dict[int, SpeedProfile]:
        return {
            i: SpeedProfile(
                times=np.array([s.T for s in self.along(i)]),
                speeds=np.array([s.c_est for s in self.along(i)]),
                flagged=np.array([s.flagged for s in self.along(i)]),
            )
            for i in sorted({s.p_index for s in self.samples})
        }

    def rows(self) -> List[List[float]]:
        out = []
        for s in sorted(self.samples, key=lambda s: (s.p_index, s.T)):
            out.append([s.p_index, s.T, *s.y.tolist(), s.c_est, int(s.flagged), s.j_max, s.K, s.residual])
        return out

    def header(self) -> List[str]:
        dim = len(self.samples[0].y) if self.samples else 0
        return ["p_index", "T"] + [f"y{i}" for i in range(dim)] + [
            "c_est", "flagged", "j_max", "K", "residual"
        ]


def build_chart(experiment: Experiment, boundary_points: Sequence[Sequence[float]],
                times: Sequence[float], j_max: int, K: int = DEFAULT_K, mode: str = GLASS_BOX,
                eps_1: float = 0.2, workers: int = 1, **kwargs) -> ReconstructedChart:
    """Chart samples on a (p, T) grid plus the speed profile along each p."""
    chart = ReconstructedChart()
    c_min = c_max = None
    if experiment.model is not None:
        c_min, c_max = experiment.model.c_min, experiment.model.c_max
    for i, p in enumerate(boundary_points):
        estimates = [
            reconstruct_point(experiment, p, T, j_max, K=K, mode=mode, eps_1=eps_1, workers=workers, **kwargs)
            for T in times
        ]
        samples = [
            ChartSample(p_index=i, p=np.asarray(p, dtype=float), T=float(e.T), y=e.y,
                        j_max=e.j_max, K=K, residual=e.residuals[-1])
            for e in estimates
        ]
        if len(samples) >= 3:
            profile = reconstruct_speed([s.T for s in samples], [s.y for s in samples], c_min, c_max)
            for s, c, flag in zip(samples, profile.speeds, profile.flagged):
                s.c_est, s.flagged = float(c), bool(flag)
        chart.samples.extend(samples)
    return chart
