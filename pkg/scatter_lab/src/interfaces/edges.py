import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ...validation.error_codes import LabErrorCode
from ...validation.exceptions import PacketError

logger = logging.getLogger(__name__)

MAD_SCALE = 1.4826
DEFAULT_WINDOW = 5
DEFAULT_MIN_JUMP = 0.02


@dataclass
class Edge:
    """A step in a sampled profile: location, right/left plateau ratio and detector response."""
    index: int
    location: float
    magnitude: float
    response: float
    left_level: float
    right_level: float


def richardson(scales: Sequence[float], values: Sequence[float]) -> Tuple[float, float]:
    """Least-squares line in 1/scale; returns (value at 1/scale = 0, max absolute residual)."""
    scales = np.asarray(scales, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(scales) == 1:
        return float(values[0]), 0.0
    x = 1.0 / scales
    coeffs = np.polyfit(x, values, 1)
    residual = float(np.max(np.abs(np.polyval(coeffs, x) - values)))
    return float(coeffs[-1]), residual


def noise_level(profile: np.ndarray, window: int) -> float:
    """Robust sigma of the first differences in the leading window."""
    lead = np.diff(profile[:window + 1])
    if len(lead) == 0:
        return 0.0
    return float(MAD_SCALE * np.median(np.abs(lead - np.median(lead))))


def jump_threshold(profile: Sequence[float], window: int = DEFAULT_WINDOW,
                   min_jump: float = DEFAULT_MIN_JUMP) -> float:
    return max(3.0 * noise_level(np.asarray(profile, dtype=float), window), min_jump)


def detector_response(profile: np.ndarray, window: int) -> np.ndarray:
    """r_i = median(profile[i-w:i]) - median(profile[i:i+w]); NaN where a window is incomplete."""
    n = len(profile)
    response = np.full(n, np.nan)
    for i in range(window, n - window + 1):
        response[i] = np.median(profile[i - window:i]) - np.median(profile[i:i + window])
    return response


def detect_jumps(times: Sequence[float], profile: Sequence[float], window: int = DEFAULT_WINDOW,
                 min_jump: float = DEFAULT_MIN_JUMP) -> List[Edge]:
    """Two-sided moving-median edge detector.

    Consecutive above-threshold responses form one edge, located at the
    response-weighted mean of the midpoints between straddling samples.
    """
    times = np.asarray(times, dtype=float)
    profile = np.asarray(profile, dtype=float)
    if len(times) != len(profile):
        raise PacketError("Times and profile differ in length", LabErrorCode.INVALID_PARAMETER)
    if len(profile) < 2 * window:
        raise PacketError(
            f"Edge detection needs at least {2 * window} samples, got {len(profile)}",
            LabErrorCode.INVALID_PARAMETER,
        )
    threshold = jump_threshold(profile, window, min_jump)
    response = detector_response(profile, window)
    above = np.nan_to_num(np.abs(response)) > threshold

    edges: List[Edge] = []
    i = 0
    while i < len(profile):
        if not above[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(profile) and above[j + 1] and np.sign(response[j + 1]) == np.sign(response[i]):
            j += 1
        group = np.arange(i, j + 1)
        weights = np.abs(response[group])
        midpoints = 0.5 * (times[group - 1] + times[group])
        location = float(weights @ midpoints / weights.sum())
        centre = int(np.clip(np.searchsorted(times, location), window, len(profile) - window))
        left = float(np.median(profile[centre - window:centre]))
        right = float(np.median(profile[centre:centre + window]))
        edges.append(Edge(
            index=centre,
            location=location,
            magnitude=right / left if left != 0.0 else np.inf,
            response=float(response[group][np.argmax(weights)]),
            left_level=left,
            right_level=right,
        ))
        i = j + 1
    logger.debug(f"Edge detector: threshold {threshold:.4g}, {len(edges)} edges")
    return edges
