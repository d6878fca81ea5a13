"""Interface location from the kinetic energy of almost direct transmissions.

A packet launched at travel time eps outside Omega toward a boundary
point p is followed for T + eps. The kinetic energy left in
Theta_(T+eps), Theta = Omega_(-2eps), tends to the squared transmitted
symbol of the normal ray at depth T as the packet scale grows. Interfaces
show up as steps of that profile in T.
"""
import logging
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Dict, List, Optional, Sequence

import numpy as np

from ...validation.error_codes import LabErrorCode
from ...validation.exceptions import CausticInCollar, LabError, NoisyProfile, PacketError, PNotOnBoundary
from ..control.scattering import DEFAULT_K, GLASS_BOX, MODES, OUTSIDE, iterate
from ..geometry.depth import DepthField, solve_depth
from ..geometry.regions import GridLevelSet
from ..maths.vectors import perp
from ..packets.packets import PacketSpec, StandardPacket, packet_cauchy_data
from ..rays.ray_path import TIR
from ..rays.tracer import DEFAULT_STEP, trace_geodesic, trace_normal_geodesic
from ..wave.cauchy import CauchyPair, kinetic_energy
from ..wave.measurement import Experiment
from ..wave.solver import propagate
from .edges import DEFAULT_MIN_JUMP, DEFAULT_WINDOW, Edge, detect_jumps, jump_threshold, richardson

logger = logging.getLogger(__name__)

DT_CEILING = 1.1
CAUSTIC_RATIO = 0.05
COLLAR_SAMPLES = 8


@dataclass
class Probe:
    """Launch geometry for one boundary point: Theta = Omega_(-2eps) and the covector (p*, nu*)."""
    p: np.ndarray
    eps: float
    theta: GridLevelSet = field(repr=False)
    omega_depth: DepthField = field(repr=False)
    p_star: Optional[np.ndarray] = None
    nu_star: Optional[np.ndarray] = None

    @property
    def theta_mask(self) -> np.ndarray:
        return self.theta.mask(self.theta.grid) & ~self.theta.grid.boundary_mask

    def region(self, T: float) -> np.ndarray:
        """Theta_(T+eps) = {d_Omega > T - eps}."""
        grid = self.theta.grid
        return (self.omega_depth.values > T - self.eps) & ~grid.boundary_mask


def _outward_map(model, omega, q, t, step):
    return trace_geodesic(model, q, -omega.inward_normal(q), t, step).endpoint


def check_collar(model, omega, p: np.ndarray, eps: float, step: float = DEFAULT_STEP) -> float:
    """Smallest Jacobian ratio of the outward normal map over the 2eps collar near p.

    Raises CausticInCollar when the determinant falls below CAUSTIC_RATIO of
    its value next to the boundary or changes sign.
    """
    if p.size == 1:
        return 1.0
    tangent = perp(omega.inward_normal(p))
    delta = 1e-4
    dt = 1e-4
    times = np.linspace(2.0 * eps / COLLAR_SAMPLES, 2.0 * eps, COLLAR_SAMPLES)
    worst = np.inf
    for offset in np.linspace(-2.0 * eps, 2.0 * eps, 5):
        q = omega.project_to_boundary(p + offset * tangent)
        q_plus = omega.project_to_boundary(q + delta * tangent)
        q_minus = omega.project_to_boundary(q - delta * tangent)
        dets = []
        for t in times:
            d_s = (_outward_map(model, omega, q_plus, t, step) - _outward_map(model, omega, q_minus, t, step)) / (2.0 * delta)
            d_t = (_outward_map(model, omega, q, t + dt, step) - _outward_map(model, omega, q, t - dt, step)) / (2.0 * dt)
            dets.append(float(np.linalg.det(np.column_stack([d_s, d_t]))))
        ratios = np.asarray(dets) / dets[0]
        worst = min(worst, float(ratios.min()))
        if ratios.min() < CAUSTIC_RATIO:
            raise CausticInCollar(
                f"Outward normal rays near {q.tolist()} focus within 2*eps = {2.0 * eps:g} "
                f"(Jacobian ratio {ratios.min():.3g})"
            )
    return worst


def setup_probe(model, chain, p: Sequence[float], eps: float, step: float = DEFAULT_STEP) -> Probe:
    """Theta = Omega_(-2eps) by fast marching, and (p*, nu*) by tracing the outward normal for time eps."""
    omega = chain.omega
    grid = chain.grid
    p = np.asarray(p, dtype=float)
    if not omega.on_boundary(p, tolerance=0.5 * grid.spacing):
        raise PNotOnBoundary(f"Point {p.tolist()} is not on the boundary of Omega")
    if eps <= 0.0:
        raise PacketError(f"Collar depth must be positive, got {eps}", LabErrorCode.INVALID_PARAMETER)
    p = omega.project_to_boundary(p)
    check_collar(model, omega, p, eps, step)

    depth = solve_depth(model, chain, omega)
    theta = GridLevelSet(grid, depth.values + 2.0 * eps)
    path = trace_geodesic(model, p, -omega.inward_normal(p), eps, step)
    if path.termination == TIR:
        raise CausticInCollar(f"Outward normal ray from {p.tolist()} is reflected within the collar")
    probe = Probe(p=p, eps=eps, theta=theta, omega_depth=depth,
                  p_star=path.endpoint, nu_star=-path.segments[-1])
    logger.debug(f"Probe at {p.tolist()}: p* = {probe.p_star.tolist()}, nu* = {probe.nu_star.tolist()}")
    return probe


@dataclass
class KEMeasurement:
    T: float
    scale: float
    launch: float
    direct: Optional[float] = None
    surrogate: Optional[float] = None
    mode: str = GLASS_BOX

    @property
    def ratio(self) -> float:
        value = self.direct if self.mode == GLASS_BOX else self.surrogate
        return value / self.launch


def launch_packet(experiment: Experiment, probe: Probe, scale: float, unit: float = 1.0) -> CauchyPair:
    spec = PacketSpec(scale=scale, center=tuple(probe.p_star), direction=tuple(probe.nu_star), unit=unit)
    allowed = probe.theta_mask & ~experiment.chain.omega_mask
    return packet_cauchy_data(experiment.exterior_medium, spec, allowed=allowed, packet=StandardPacket(experiment.grid.dim))


def measure_ke(experiment: Experiment, probe: Probe, T: float, scale: float, K: int = DEFAULT_K,
               mode: str = GLASS_BOX, unit: float = 1.0) -> KEMeasurement:
    """KE in Theta_(T+eps) after T + eps; the outside mode adds the scattering-control surrogate."""
    if mode not in MODES:
        raise PacketError(f"Unknown mode '{mode}', expected one of {MODES}", LabErrorCode.INVALID_PARAMETER)
    h = launch_packet(experiment, probe, scale, unit)
    medium = experiment.glass_box()
    moved = propagate(medium, h.with_medium(medium), T + probe.eps, dt=experiment.dt, cfl=experiment.cfl)
    result = KEMeasurement(T=T, scale=scale, launch=kinetic_energy(h), mode=mode,
                           direct=kinetic_energy(moved, probe.region(T)))
    if mode == OUTSIDE:
        run = iterate(experiment.with_theta(probe.theta), h, T + probe.eps, K=K, mode=OUTSIDE)
        result.surrogate = run.surrogate_kinetic()[-1]
    logger.debug(f"KE at T={T:g}, scale={scale:g}: ratio {result.ratio:.5g}")
    return result


def ke_profile(experiment: Experiment, probe: Probe, times: Sequence[float], scale: float,
               unit: float = 1.0) -> List[KEMeasurement]:
    """Glass-box KE ratios at increasing times from one propagation."""
    h = launch_packet(experiment, probe, scale, unit)
    launch = kinetic_energy(h)
    medium = experiment.glass_box()
    state = h.with_medium(medium)
    clock = 0.0
    out = []
    for T in times:
        state = propagate(medium, state, T + probe.eps - clock, dt=experiment.dt, cfl=experiment.cfl)
        clock = T + probe.eps
        out.append(KEMeasurement(T=T, scale=scale, launch=launch, direct=kinetic_energy(state, probe.region(T))))
    logger.debug(f"KE profile at scale {scale:g}: {len(out)} times")
    return out


def _profile_task(args):
    experiment, probe, times, scale, unit = args
    return ke_profile(experiment, probe, times, scale, unit)


def _cell_task(args):
    experiment, probe, T, scale, K, mode, unit = args
    return measure_ke(experiment, probe, T, scale, K, mode, unit)


@dataclass
class EnergyScan:
    p: np.ndarray
    times: np.ndarray
    scales: np.ndarray
    eps: float
    mode: str
    ke_table: np.ndarray = field(repr=False)
    launch_table: np.ndarray = field(repr=False)
    direct_table: np.ndarray = field(repr=False)
    dt_estimates: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)
    flagged: np.ndarray = field(repr=False)

    @staticmethod
    def header() -> List[str]:
        return ["T", "scale", "ke_ratio", "launch_ke", "direct_ke", "dt_squared", "residual", "flagged"]

    def rows(self) -> List[list]:
        rows = []
        for i, T in enumerate(self.times):
            for j, scale in enumerate(self.scales):
                rows.append([
                    float(T), float(scale), float(self.ke_table[i, j]), float(self.launch_table[i, j]),
                    float(self.direct_table[i, j]), float(self.dt_estimates[i]),
                    float(self.residuals[i]), int(self.flagged[i]),
                ])
        return rows


def energy_scan(experiment: Experiment, probe: Probe, times: Sequence[float], scales: Sequence[float],
                K: int = DEFAULT_K, mode: str = GLASS_BOX, unit: float = 1.0, workers: int = 1) -> EnergyScan:
    times = np.asarray(times, dtype=float)
    scales = np.asarray(scales, dtype=float)
    if len(times) == 0 or np.any(times <= 0.0) or np.any(np.diff(times) <= 0.0):
        raise PacketError("Scan times must be positive and strictly increasing", LabErrorCode.INVALID_PARAMETER)
    if mode == GLASS_BOX:
        tasks = [(experiment, probe, times, scale, unit) for scale in scales]
        worker = _profile_task
    else:
        tasks = [(experiment, probe, T, scale, K, mode, unit) for T in times for scale in scales]
        worker = _cell_task
    if workers > 1:
        with Pool(workers) as pool:
            results = pool.map(worker, tasks)
    else:
        results = [worker(task) for task in tasks]
    if mode == GLASS_BOX:
        cells = [[results[j][i] for j in range(len(scales))] for i in range(len(times))]
    else:
        cells = [results[i * len(scales):(i + 1) * len(scales)] for i in range(len(times))]

    ke = np.array([[m.ratio for m in row] for row in cells])
    launch = np.array([[m.launch for m in row] for row in cells])
    direct = np.array([[m.direct for m in row] for row in cells])
    estimates = np.empty(len(times))
    residuals = np.empty(len(times))
    flagged = np.zeros(len(times), dtype=bool)
    for i in range(len(times)):
        value, residuals[i] = richardson(scales, ke[i])
        flagged[i] = not 0.0 <= value <= DT_CEILING
        estimates[i] = np.clip(value, 0.0, DT_CEILING)
    if flagged.any():
        logger.warning(
            f"{LabErrorCode.NOISY_PROFILE.name}: {int(flagged.sum())} extrapolated |dt+|^2 values "
            f"left [0, {DT_CEILING}] and were clipped"
        )
    return EnergyScan(p=probe.p, times=times, scales=scales, eps=probe.eps, mode=mode, ke_table=ke,
                      launch_table=launch, direct_table=direct, dt_estimates=estimates,
                      residuals=residuals, flagged=flagged)


@dataclass
class InterfaceJump:
    """A located interface in boundary normal coordinates (p, depth)."""
    depth: float
    magnitude: float
    cumulative: float
    edge: Edge = field(repr=False)
    point: Optional[np.ndarray] = None


@dataclass
class InterfaceReport:
    scan: EnergyScan
    jumps: List[InterfaceJump]
    threshold: float

    @staticmethod
    def header() -> List[str]:
        return ["depth", "magnitude", "cumulative", "x", "y"]

    def rows(self) -> List[list]:
        rows = []
        for jump in self.jumps:
            point = [] if jump.point is None else [float(v) for v in jump.point]
            point += [float("nan")] * (2 - len(point))
            rows.append([jump.depth, jump.magnitude, jump.cumulative] + point)
        return rows

    def summary(self) -> Dict[str, object]:
        return {
            "p": self.scan.p.tolist(),
            "eps": self.scan.eps,
            "mode": self.scan.mode,
            "threshold": self.threshold,
            "depths": [j.depth for j in self.jumps],
            "magnitudes": [j.magnitude for j in self.jumps],
        }


def plateau_mask(times: np.ndarray, edges: Sequence[Edge], eps: float) -> np.ndarray:
    """Samples farther than eps plus one sample spacing from every edge."""
    spacing = float(np.max(np.diff(times))) if len(times) > 1 else 0.0
    mask = np.ones(len(times), dtype=bool)
    for edge in edges:
        mask &= np.abs(times - edge.location) > eps + spacing
    return mask


def scan_and_locate(experiment: Experiment, p: Sequence[float], times: Sequence[float], scales: Sequence[float],
                    eps: float, K: int = DEFAULT_K, mode: str = GLASS_BOX, unit: float = 1.0,
                    window: int = DEFAULT_WINDOW, min_jump: float = DEFAULT_MIN_JUMP,
                    workers: int = 1) -> InterfaceReport:
    """Interface depths below p and their energy transmission factors.

    The reflected branch stays inside Theta_(T+eps) until T = depth + eps/2,
    so detected steps are moved back by eps/2.
    """
    model = experiment.model
    if model is None:
        raise PacketError("Interface scans need the speed model outside Omega", LabErrorCode.INVALID_PARAMETER)
    probe = setup_probe(model, experiment.chain, p, eps)
    scan = energy_scan(experiment, probe, times, scales, K=K, mode=mode, unit=unit, workers=workers)
    profile = scan.dt_estimates
    threshold = jump_threshold(profile, window, min_jump)
    edges = detect_jumps(scan.times, profile, window, min_jump)

    plateau = plateau_mask(scan.times, edges, eps)
    if plateau.any():
        noise = float(np.median(scan.residuals[plateau]))
        if noise > 0.2 * threshold:
            raise NoisyProfile(
                f"Extrapolation residual {noise:.3g} exceeds 20% of the jump threshold {threshold:.3g}"
            )

    jumps = []
    cumulative = 1.0
    for edge in edges:
        cumulative *= edge.magnitude
        depth = edge.location - 0.5 * eps
        jumps.append(InterfaceJump(depth=depth, magnitude=edge.magnitude, cumulative=cumulative,
                                   edge=edge, point=_normal_point(model, experiment.chain, probe.p, depth)))
    logger.info(f"Located {len(jumps)} interfaces below {probe.p.tolist()}: "
                f"{[round(j.depth, 4) for j in jumps]}")
    return InterfaceReport(scan=scan, jumps=jumps, threshold=threshold)


def _normal_point(model, chain, p, depth) -> Optional[np.ndarray]:
    try:
        return trace_normal_geodesic(model, chain.omega, p, depth).endpoint
    except LabError as e:
        logger.debug(f"No boundary-normal point at depth {depth:g}: {e}")
        return None
