import copy
import logging
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml

from ..validation.validators.config import ConfigValidator

logger = logging.getLogger(__name__)

ENV_OVERRIDES = {
    'SCATTER_LAB_OUT': ('out', str),
    'SCATTER_LAB_WORKERS': ('workers', int),
    'SCATTER_LAB_MODE': ('mode', str),
    'SCATTER_LAB_SEED': ('seed', int),
}


@dataclass
class GridSection:
    extent: List[List[float]] = field(default_factory=lambda: [[-1.0, 1.0]])
    spacing: float = 0.01


@dataclass
class ChainSection:
    omega: Dict[str, Any] = field(default_factory=lambda: {'type': 'interval', 'bounds': [0.0, 0.5]})
    theta: Dict[str, Any] = field(default_factory=lambda: {'type': 'interval', 'bounds': [-0.3, 0.5]})
    t_max: float = 0.0


@dataclass
class SolverSection:
    cfl: Optional[float] = None
    dt: Optional[float] = None


@dataclass
class ProjectionSection:
    solver: str = 'direct'
    tolerance: float = 1e-10


@dataclass
class ForwardSection:
    horizon: float = 1.0
    snapshots: int = 5
    track_energy: bool = True
    initial: Dict[str, Any] = field(default_factory=lambda: {'type': 'collar', 'cells': 2})


@dataclass
class ControlSection:
    T: float = 0.2
    K: int = 8
    early_stop: bool = False
    initial: Dict[str, Any] = field(default_factory=lambda: {'type': 'collar', 'cells': 2})


@dataclass
class ReconstructSection:
    points: List[List[float]] = field(default_factory=list)
    times: List[float] = field(default_factory=list)
    j_max: int = 3
    K: int = 8
    eps_1: float = 0.2


@dataclass
class LocateSection:
    p: Optional[List[float]] = None
    times: List[float] = field(default_factory=list)
    scales: List[float] = field(default_factory=lambda: [8.0, 16.0, 32.0])
    eps: float = 0.08
    K: int = 8
    unit: float = 1.0
    window: int = 5
    min_jump: float = 0.02


@dataclass
class TraceSection:
    x0: Optional[List[float]] = None
    direction: Optional[List[float]] = None
    T: float = 1.0
    step: float = 1e-3


@dataclass
class RegularitySection:
    points: List[List[float]] = field(default_factory=list)
    max_samples: int = 256
    step: float = 1e-3


SECTIONS = {
    'grid': GridSection,
    'chain': ChainSection,
    'solver': SolverSection,
    'projection': ProjectionSection,
    'forward': ForwardSection,
    'control': ControlSection,
    'reconstruct': ReconstructSection,
    'locate': LocateSection,
    'trace': TraceSection,
    'regularity': RegularitySection,
}
SCALARS = ('model', 'seed', 'workers', 'mode', 'out')


@dataclass
class ExperimentConfig:
    model: str
    grid: GridSection = field(default_factory=GridSection)
    chain: ChainSection = field(default_factory=ChainSection)
    solver: SolverSection = field(default_factory=SolverSection)
    projection: ProjectionSection = field(default_factory=ProjectionSection)
    seed: int = 0
    workers: int = 1
    mode: str = 'glassbox'
    out: str = 'results'
    forward: ForwardSection = field(default_factory=ForwardSection)
    control: ControlSection = field(default_factory=ControlSection)
    reconstruct: ReconstructSection = field(default_factory=ReconstructSection)
    locate: LocateSection = field(default_factory=LocateSection)
    trace: TraceSection = field(default_factory=TraceSection)
    regularity: RegularitySection = field(default_factory=RegularitySection)

    @classmethod
    def load_from_file(cls, filename: Union[str, Path]) -> 'ExperimentConfig':
        path = Path(filename)
        if not path.is_file():
            raise FileNotFoundError(f"Config file not found: {path}")
        with open(path, 'r') as file:
            data = yaml.safe_load(file) or {}

        # Override with environment variables if set
        for variable, (key, kind) in ENV_OVERRIDES.items():
            value = os.environ.get(variable)
            if value is not None:
                data[key] = kind(value)
                logger.debug(f"{key} overridden by {variable}={value}")

        return cls.from_dict(data, base_dir=path.parent)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: Optional[Path] = None) -> 'ExperimentConfig':
        ConfigValidator(SECTIONS, SCALARS).validate(data)
        data = copy.deepcopy(data)
        model = Path(data['model'])
        if not model.is_absolute() and base_dir is not None:
            model = base_dir / model
        kwargs: Dict[str, Any] = {'model': str(model.resolve())}
        for key in SCALARS[1:]:
            if key in data:
                kwargs[key] = data[key]
        for key, section in SECTIONS.items():
            kwargs[key] = section(**(data.get(key) or {}))
        return cls(**kwargs)

    def with_overrides(self, **overrides: Any) -> 'ExperimentConfig':
        """Copy with top-level scalars replaced; None values are ignored."""
        data = self.resolved()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return ExperimentConfig.from_dict(data)

    @property
    def model_path(self) -> Path:
        return Path(self.model)

    def section(self, name: str):
        return getattr(self, name)

    def resolved(self) -> Dict[str, Any]:
        """Every key with defaults filled in; loading this dict reproduces the config."""
        out: Dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = asdict(value) if f.name in SECTIONS else value
        return out
