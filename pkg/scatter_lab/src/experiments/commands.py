"""Experiment drivers behind the command-line subcommands.

Every command validates its config, computes, and writes its data products
plus `manifest.yaml` (the fully resolved config, loadable as is) and
`summary.yaml` (scalar results) into `config.out`.
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import numpy as np

from ...validation.exceptions import CFLViolation, ConfigSchemaError, LabError
from ..config import ExperimentConfig
from ..control.scattering import GLASS_BOX, adt_ground_truth, energy_report, iterate
from ..geometry.domain_chain import DomainChain
from ..geometry.grid import Grid
from ..geometry.regions import region_from_config
from ..geometry.speed_model import SpeedModel, load_speed_model
from ..interfaces.recovery import scan_and_locate
from ..rays.regularity import regularity_check
from ..rays.symbols import dt_symbol
from ..rays.tracer import trace_geodesic
from ..recon.kappa import build_chart
from ..utils.grid_io import write_csv, write_grid, write_manifest
from ..wave.measurement import Experiment
from ..wave.solver import run, stable_dt, time_steps
from .sources import initial_data

logger = logging.getLogger(__name__)

MANIFEST = 'manifest.yaml'
SUMMARY = 'summary.yaml'


@dataclass
class Artifacts:
    """Files written by one command and its scalar results."""
    command: str
    out_dir: Path
    files: Dict[str, Path] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)

    def finish(self, config: ExperimentConfig) -> 'Artifacts':
        self.files['manifest'] = write_manifest(self.out_dir / MANIFEST, config.resolved())
        self.files['summary'] = write_manifest(self.out_dir / SUMMARY, {'command': self.command, **self.summary})
        logger.info(f"{self.command}: wrote {len(self.files)} files to {self.out_dir}")
        return self


def load_model(config: ExperimentConfig) -> SpeedModel:
    model = load_speed_model(config.model_path)
    if model.dim != len(config.grid.extent):
        raise ConfigSchemaError(
            f"Model is {model.dim}D but grid.extent has {len(config.grid.extent)} axes",
            keys=['grid.extent'],
        )
    return model


def build_chain(config: ExperimentConfig, model: SpeedModel) -> DomainChain:
    grid = Grid.from_extent(config.grid.extent, config.grid.spacing)
    chain = DomainChain(
        omega=region_from_config(config.chain.omega),
        theta=region_from_config(config.chain.theta),
        grid=grid,
        t_max=config.chain.t_max,
    )
    logger.info(f"Domain chain on {grid}: {int(chain.omega_mask.sum())} hidden-region nodes")
    return chain.validate(model)


def build_experiment(config: ExperimentConfig) -> Experiment:
    """Model, chain and solver settings; a too-large dt is refused here, before any propagation."""
    model = load_model(config)
    experiment = Experiment.from_model(model, build_chain(config, model), cfl=config.solver.cfl, dt=config.solver.dt)
    if config.solver.dt is not None:
        bound = stable_dt(experiment.truth, config.solver.cfl)
        if config.solver.dt > bound * (1.0 + 1e-12):
            raise CFLViolation(f"solver.dt = {config.solver.dt:.6g} exceeds the CFL bound {bound:.6g}")
    return experiment


def _out_dir(config: ExperimentConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _projection_kwargs(config: ExperimentConfig) -> Dict[str, Any]:
    return {'solver': config.projection.solver, 'tolerance': config.projection.tolerance}


def _require(value: Any, key: str) -> Any:
    if value is None or (hasattr(value, '__len__') and len(value) == 0):
        raise ConfigSchemaError(f"{key} is required for this command", keys=[key])
    return value


def cmd_forward(config: ExperimentConfig) -> Artifacts:
    """Propagate the configured initial data in the true medium and dump snapshots and energies."""
    section = config.forward
    experiment = build_experiment(config)
    medium = experiment.truth
    n, dt = time_steps(medium, section.horizon, config.solver.dt, config.solver.cfl)
    h = initial_data(section.initial, experiment.chain, medium, config.seed)
    store_every = max(1, math.ceil(n / max(section.snapshots - 1, 1)))
    field_ = run(medium, h, section.horizon, dt=config.solver.dt, cfl=config.solver.cfl,
                 store_every=store_every, track_energy=section.track_energy)

    artifacts = Artifacts('forward', _out_dir(config))
    artifacts.files['speed'] = write_grid(artifacts.out_dir / 'speed.grid', experiment.grid, medium.speed)
    for k, (u, v) in enumerate(field_.snapshots):
        artifacts.files[f'snapshot_{k}'] = write_grid(artifacts.out_dir / f'snapshot_{k:04d}.grid',
                                                      experiment.grid, u, v)
    if section.track_energy:
        rows = zip(range(len(field_.energy)), field_.step_times, field_.energy, field_.shadow_energy)
        artifacts.files['energy'] = write_csv(artifacts.out_dir / 'energy.csv',
                                              ['step', 't', 'energy', 'shadow_energy'], rows)
    artifacts.summary = {
        'steps': n,
        'dt': abs(dt),
        'snapshot_times': field_.times,
        'relative_drift': field_.relative_drift(shadow=True) if section.track_energy else None,
    }
    return artifacts.finish(config)


def cmd_control(config: ExperimentConfig) -> Artifacts:
    """Scattering control series for the configured h0, with its norm sequence."""
    section = config.control
    experiment = build_experiment(config)
    medium = experiment.glass_box() if config.mode == GLASS_BOX else experiment.exterior_medium
    h0 = initial_data(section.initial, experiment.chain, medium, config.seed)
    control = iterate(experiment, h0, section.T, K=section.K, mode=config.mode,
                      early_stop=section.early_stop, **_projection_kwargs(config))
    ground_truth = None
    if config.mode == GLASS_BOX:
        ground_truth = adt_ground_truth(experiment, h0, section.T, solver=config.projection.solver)
    report = energy_report(control, ground_truth)

    artifacts = Artifacts('control', _out_dir(config))
    surrogate = control.surrogate_kinetic()
    rows = (
        [k, control.norms[k], math.nan if control.norms_direct[k] is None else control.norms_direct[k],
         control.exterior_energy[k], control.extension_energy[k], surrogate[k], control.control_leak[k]]
        for k in range(len(control.iterates))
    )
    artifacts.files['norms'] = write_csv(
        artifacts.out_dir / 'norms.csv',
        ['k', 'norm', 'norm_direct', 'exterior_energy', 'extension_energy', 'ke_surrogate', 'control_leak'],
        rows,
    )
    final = control.iterates[-1]
    artifacts.files['control'] = write_grid(artifacts.out_dir / 'control.grid', experiment.grid,
                                            final.h0, final.h1)
    artifacts.summary = report
    return artifacts.finish(config)


def cmd_reconstruct(config: ExperimentConfig) -> Artifacts:
    """Chart of Euclidean points and speeds over the configured (p, T) samples."""
    section = config.reconstruct
    points = _require(section.points, 'reconstruct.points')
    times = _require(section.times, 'reconstruct.times')
    experiment = build_experiment(config)
    chart = build_chart(experiment, points, times, section.j_max, K=section.K, mode=config.mode,
                        eps_1=section.eps_1, workers=config.workers, **_projection_kwargs(config))

    artifacts = Artifacts('reconstruct-speed', _out_dir(config))
    artifacts.files['chart'] = write_csv(artifacts.out_dir / 'chart.csv', chart.header(), chart.rows())
    profiles = chart.profiles()
    artifacts.summary = {
        'samples': len(chart.samples),
        'flagged': sum(int(s.flagged) for s in chart.samples),
        'mean_speed': {
            int(i): float(np.nanmean(np.where(p.flagged, np.nan, p.speeds))) if (~p.flagged).any() else None
            for i, p in profiles.items()
        },
        'source_density': 'indicator mollified over 2 cells',
    }
    return artifacts.finish(config)


def cmd_locate(config: ExperimentConfig) -> Artifacts:
    """Energy scan below one boundary point and the interfaces detected in it."""
    section = config.locate
    p = _require(section.p, 'locate.p')
    times = _require(section.times, 'locate.times')
    experiment = build_experiment(config)
    report = scan_and_locate(experiment, p, times, section.scales, section.eps, K=section.K,
                             mode=config.mode, unit=section.unit, window=section.window,
                             min_jump=section.min_jump, workers=config.workers)

    artifacts = Artifacts('locate-interfaces', _out_dir(config))
    artifacts.files['scan'] = write_csv(artifacts.out_dir / 'scan.csv', report.scan.header(), report.scan.rows())
    artifacts.files['interfaces'] = write_csv(artifacts.out_dir / 'interfaces.csv', report.header(), report.rows())
    artifacts.summary = report.summary()
    return artifacts.finish(config)


def cmd_trace(config: ExperimentConfig) -> Artifacts:
    """Transmitted broken geodesic from one point and direction, with its transmission symbol."""
    section = config.trace
    x0 = _require(section.x0, 'trace.x0')
    direction = _require(section.direction, 'trace.direction')
    model = load_model(config)
    path = trace_geodesic(model, x0, direction, section.T, step=section.step)
    try:
        symbol: Optional[float] = dt_symbol(path)
    except LabError as e:
        logger.warning(f"{e.code.name}: no transmission symbol for this ray")
        symbol = None

    artifacts = Artifacts('trace-ray', _out_dir(config))
    artifacts.files['ray'] = write_csv(artifacts.out_dir / 'ray.csv', path.header(), path.rows())
    artifacts.summary = {
        'termination': path.termination,
        'endpoint': path.endpoint,
        'duration': path.duration,
        'crossings': len(path.crossings),
        'crossing_times': path.crossing_times(),
        'dt_symbol': symbol,
        'snell_residual': max((c.snell_residual() for c in path.crossings), default=0.0),
    }
    return artifacts.finish(config)


def cmd_regularity(config: ExperimentConfig) -> Artifacts:
    """Classify each configured point as regular, focal, multipath, demi-tangent or on-interface."""
    section = config.regularity
    points = _require(section.points, 'regularity.points')
    model = load_model(config)
    chain = build_chain(config, model)
    reports = [regularity_check(model, chain, y, max_samples=section.max_samples, step=section.step)
               for y in points]

    dim = chain.grid.dim
    rows = (
        [i, *r.y.tolist(), r.classification,
         math.nan if r.depth is None else r.depth,
         math.nan if r.determinant is None else r.determinant,
         len(r.arrivals)]
        for i, r in enumerate(reports)
    )
    artifacts = Artifacts('check-regularity', _out_dir(config))
    artifacts.files['regularity'] = write_csv(
        artifacts.out_dir / 'regularity.csv',
        ['index'] + [f'y{i}' for i in range(dim)] + ['classification', 'depth', 'determinant', 'arrivals'],
        rows,
    )
    counts: Dict[str, int] = {}
    for r in reports:
        counts[r.classification] = counts.get(r.classification, 0) + 1
    artifacts.summary = {'points': len(reports), 'classifications': counts}
    return artifacts.finish(config)


COMMANDS: Dict[str, Callable[[ExperimentConfig], Artifacts]] = {
    'forward': cmd_forward,
    'control': cmd_control,
    'reconstruct-speed': cmd_reconstruct,
    'locate-interfaces': cmd_locate,
    'trace-ray': cmd_trace,
    'check-regularity': cmd_regularity,
}
