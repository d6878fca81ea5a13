import logging
from dataclasses import fields
from typing import Any, Callable, Dict, Iterable, Mapping, Optional, Tuple

from .base import BaseValidator

logger = logging.getLogger(__name__)

MODES = ('glassbox', 'outside')
PROJECTION_SOLVERS = ('direct', 'cg')


def _positive(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0


def _non_negative(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and value >= 0


def _count(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value >= 0


def _increasing(value) -> bool:
    if not isinstance(value, (list, tuple)):
        return False
    try:
        numbers = [float(v) for v in value]
    except (TypeError, ValueError):
        return False
    return all(b > a for a, b in zip(numbers, numbers[1:]))


def _extent(value) -> bool:
    if not isinstance(value, (list, tuple)) or len(value) not in (1, 2):
        return False
    return all(isinstance(pair, (list, tuple)) and len(pair) == 2 and pair[1] > pair[0] for pair in value)


# (section, key) -> (check, message); None in the value skips the check
RULES: Dict[Tuple[str, str], Tuple[Callable[[Any], bool], str]] = {
    ('grid', 'extent'): (_extent, "must be one [lo, hi] pair per axis with lo < hi (1 or 2 axes)"),
    ('grid', 'spacing'): (_positive, "must be positive"),
    ('chain', 't_max'): (_non_negative, "must be non-negative"),
    ('chain', 'omega'): (lambda v: isinstance(v, Mapping) and 'type' in v, "must be a region mapping with a type"),
    ('chain', 'theta'): (lambda v: isinstance(v, Mapping) and 'type' in v, "must be a region mapping with a type"),
    ('solver', 'cfl'): (lambda v: _positive(v) and v <= 1.0, "must lie in (0, 1]"),
    ('solver', 'dt'): (_positive, "must be positive"),
    ('projection', 'solver'): (lambda v: v in PROJECTION_SOLVERS, f"must be one of {PROJECTION_SOLVERS}"),
    ('projection', 'tolerance'): (_positive, "must be positive"),
    ('forward', 'horizon'): (_non_negative, "must be non-negative"),
    ('forward', 'snapshots'): (lambda v: _count(v) and v >= 1, "must be a positive integer"),
    ('control', 'T'): (_positive, "must be positive"),
    ('control', 'K'): (_count, "must be a non-negative integer"),
    ('reconstruct', 'times'): (_increasing, "must be strictly increasing"),
    ('reconstruct', 'j_max'): (lambda v: _count(v) and v >= 1, "must be a positive integer"),
    ('reconstruct', 'K'): (_count, "must be a non-negative integer"),
    ('reconstruct', 'eps_1'): (_positive, "must be positive"),
    ('locate', 'times'): (_increasing, "must be strictly increasing"),
    ('locate', 'scales'): (lambda v: isinstance(v, (list, tuple)) and len(v) > 0 and all(_positive(s) for s in v),
                           "must be a non-empty list of positive scales"),
    ('locate', 'eps'): (_positive, "must be positive"),
    ('locate', 'K'): (_count, "must be a non-negative integer"),
    ('locate', 'unit'): (_positive, "must be positive"),
    ('locate', 'window'): (lambda v: _count(v) and v >= 2, "must be an integer of at least 2"),
    ('locate', 'min_jump'): (_positive, "must be positive"),
    ('trace', 'T'): (_positive, "must be positive"),
    ('trace', 'step'): (_positive, "must be positive"),
    ('regularity', 'max_samples'): (lambda v: _count(v) and v >= 1, "must be a positive integer"),
    ('regularity', 'step'): (_positive, "must be positive"),
}

SCALAR_RULES: Dict[str, Tuple[Callable[[Any], bool], str]] = {
    'model': (lambda v: isinstance(v, str) and len(v) > 0, "must be a path to a model file"),
    'seed': (_count, "must be a non-negative integer"),
    'workers': (lambda v: _count(v) and v >= 1, "must be a positive integer"),
    'mode': (lambda v: v in MODES, f"must be one of {MODES}"),
    'out': (lambda v: isinstance(v, str) and len(v) > 0, "must be a directory path"),
}


class ConfigValidator(BaseValidator):
    """Checks an experiment config mapping against its sections before anything is computed."""

    SCOPE = 'config'

    def __init__(self, sections: Mapping[str, type], scalars: Iterable[str]):
        super().__init__()
        self.sections = dict(sections)
        self.scalars = tuple(scalars)

    def validate(self, data: Any) -> None:
        with self.validation_scope(self.SCOPE):
            if not isinstance(data, Mapping):
                self.fail('<root>', "config must be a mapping")
            else:
                self._check_top_level(data)
                for name, section in self.sections.items():
                    self._check_section(name, section, data.get(name))
        self.raise_for_failures(self.SCOPE)

    def _check_top_level(self, data: Mapping[str, Any]) -> None:
        if 'model' not in data:
            self.fail('model', "is required")
        for key in data:
            if key not in self.scalars and key not in self.sections:
                self.fail(str(key), "unknown key")
        for key, (check, message) in SCALAR_RULES.items():
            if key in data and not check(data[key]):
                self.fail(key, f"{message}, got {data[key]!r}")

    def _check_section(self, name: str, section: type, values: Optional[Any]) -> None:
        if values is None:
            return
        if not isinstance(values, Mapping):
            self.fail(name, "must be a mapping")
            return
        known = {f.name for f in fields(section)}
        for key, value in values.items():
            if key not in known:
                self.fail(f"{name}.{key}", "unknown key")
                continue
            rule = RULES.get((name, key))
            if rule is not None and value is not None and not rule[0](value):
                self.fail(f"{name}.{key}", f"{rule[1]}, got {value!r}")
        logger.debug(f"Checked config section '{name}'")
