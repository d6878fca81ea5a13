"""Data products: binary grid files, CSV tables and run manifests.

A grid file is the 8-byte magic ``SCLGRID1``, a little-endian uint32 field
count and uint32 dim, dim uint64 sizes, dim float64 origin values, one
float64 spacing, then the fields as float64 in row-major order.
"""
import csv
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
import yaml

from ...validation.error_codes import LabErrorCode
from ...validation.exceptions import ConfigError, GridMismatch
from ..geometry.grid import Grid

logger = logging.getLogger(__name__)

MAGIC = b"SCLGRID1"
PathLike = Union[str, Path]


def format_value(value: Any) -> str:
    """17 significant digits for floats, plain text otherwise."""
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if isinstance(value, (np.integer, np.bool_)):
        return str(int(value))
    return str(value)


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='') as file:
        writer = csv.writer(file, lineterminator='\n')
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([format_value(v) for v in row])
            count += 1
    logger.debug(f"Wrote {count} rows to {path}")
    return path


def read_csv(path: PathLike) -> Tuple[List[str], List[List[str]]]:
    with open(path, 'r', newline='') as file:
        reader = csv.reader(file)
        header = next(reader)
        return header, [row for row in reader]


def write_grid(path: PathLike, grid: Grid, *fields: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    for f in fields:
        if f.shape != grid.shape:
            raise GridMismatch(f"Field of shape {f.shape} does not match {grid}")
    with open(path, 'wb') as file:
        file.write(MAGIC)
        file.write(np.array([len(fields), grid.dim], dtype='<u4').tobytes())
        file.write(np.array(grid.shape, dtype='<u8').tobytes())
        file.write(np.array(grid.origin, dtype='<f8').tobytes())
        file.write(np.array([grid.spacing], dtype='<f8').tobytes())
        for f in fields:
            file.write(np.ascontiguousarray(f, dtype='<f8').tobytes())
    return path


def read_grid(path: PathLike) -> Tuple[Grid, List[np.ndarray]]:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise ConfigError(f"{path} is not a grid file", LabErrorCode.MISSING_FILE)
    offset = 8
    count, dim = np.frombuffer(data, dtype='<u4', count=2, offset=offset)
    offset += 8
    shape = tuple(int(n) for n in np.frombuffer(data, dtype='<u8', count=dim, offset=offset))
    offset += 8 * int(dim)
    origin = tuple(float(o) for o in np.frombuffer(data, dtype='<f8', count=dim, offset=offset))
    offset += 8 * int(dim)
    spacing = float(np.frombuffer(data, dtype='<f8', count=1, offset=offset)[0])
    offset += 8
    grid = Grid(origin=origin, spacing=spacing, shape=shape)
    fields = []
    for _ in range(int(count)):
        fields.append(np.frombuffer(data, dtype='<f8', count=grid.size, offset=offset).reshape(shape).copy())
        offset += 8 * grid.size
    return grid, fields


def plain(value: Any) -> Any:
    """Numpy scalars, arrays, tuples and paths as YAML-safe builtins."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [plain(v) for v in value]
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, np.bool_)):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    return value


def write_manifest(path: PathLike, manifest: Dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as file:
        yaml.safe_dump(plain(manifest), file, sort_keys=False, default_flow_style=None)
    return path
