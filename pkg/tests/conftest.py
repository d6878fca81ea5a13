from pathlib import Path

import numpy as np
import pytest

import scatter_lab
from scatter_lab.src.config import ExperimentConfig
from scatter_lab.src.geometry import DomainChain, Grid, Interval, load_speed_model
from scatter_lab.src.geometry.speed_model import build_speed_model, homogeneous_model
from scatter_lab.src.wave import Experiment

PACKAGE = Path(scatter_lab.__file__).parent
CONFIGS = PACKAGE / 'configs'
MODELS = CONFIGS / 'models'


def bundled_config(name: str, tmp_path: Path, **overrides) -> ExperimentConfig:
    return ExperimentConfig.load_from_file(CONFIGS / name).with_overrides(out=str(tmp_path / 'out'), **overrides)


@pytest.fixture
def grid_1d():
    return Grid.from_extent([[-1.0, 1.0]], 1.0 / 128)


@pytest.fixture
def grid_2d():
    return Grid.from_extent([[-1.0, 1.0], [-1.0, 1.0]], 0.05)


@pytest.fixture
def homogeneous_1d():
    return homogeneous_model(1, 1.0, extent=[[-1.0, 1.0]])


@pytest.fixture
def two_layer_1d():
    return load_speed_model(MODELS / 'two_layer_1d.yaml')


@pytest.fixture
def two_layer_2d():
    return load_speed_model(MODELS / 'two_layer_2d.yaml')


@pytest.fixture
def homogeneous_chain_1d():
    grid = Grid.from_extent([[-0.5, 1.5]], 0.01)
    return DomainChain(omega=Interval(0.0, 1.0), theta=Interval(-0.25, 1.25), grid=grid)


@pytest.fixture
def homogeneous_experiment_1d(homogeneous_chain_1d):
    model = homogeneous_model(1, 1.0, extent=[[-0.5, 1.5]])
    return Experiment.from_model(model, homogeneous_chain_1d.validate(model))


@pytest.fixture
def two_layer_experiment_1d(two_layer_1d):
    grid = Grid.from_extent([[-0.5, 2.3]], 0.01)
    chain = DomainChain(omega=Interval(0.0, 1.5), theta=Interval(-0.2, 1.7), grid=grid, t_max=0.1)
    return Experiment.from_model(two_layer_1d, chain.validate(two_layer_1d))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def disk_inclusion_2d():
    return load_speed_model(MODELS / 'disk_inclusion_2d.yaml')


@pytest.fixture
def bundled(tmp_path):
    """Loader for the configs shipped with the package, writing into tmp_path."""
    def load(name: str, **overrides) -> ExperimentConfig:
        return bundled_config(name, tmp_path, **overrides)
    return load


def layered_model_1d(interfaces, speeds, extent):
    """Piecewise-constant 1D model with speeds[k] between interfaces k-1 and k."""
    edges = [-1e3, *interfaces]
    regions = [
        {'name': f'layer{k}', 'indicator': {'type': 'interval', 'bounds': [lo, hi]}, 'speed': c}
        for k, (lo, hi, c) in enumerate(zip(edges, edges[1:], speeds))
    ]
    regions.append({'name': f'layer{len(interfaces)}', 'indicator': {'type': 'rest'}, 'speed': speeds[-1]})
    return build_speed_model({
        'dim': 1,
        'extent': [list(extent)],
        'bounds': {'c_min': min(speeds), 'c_max': max(speeds)},
        'regions': regions,
        'interfaces': [{'type': 'point', 'at': x} for x in interfaces],
    })


@pytest.fixture
def layered_experiment():
    """Builder for 1D layered experiments on a grid covering `extent`."""
    def build(interfaces, speeds, extent, spacing, omega, theta, t_max=0.0) -> Experiment:
        model = layered_model_1d(interfaces, speeds, extent)
        grid = Grid.from_extent([list(extent)], spacing)
        chain = DomainChain(omega=Interval(*omega), theta=Interval(*theta), grid=grid, t_max=t_max)
        return Experiment.from_model(model, chain.validate(model))
    return build
