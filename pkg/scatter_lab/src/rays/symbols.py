import numpy as np

from ...validation.exceptions import GrazingAngle, TIRTermination
from .ray_path import TIR, Crossing, RayPath

GRAZING_TOLERANCE = 1e-3
SMALL_ANGLE = 1e-6


def transmission_factor(crossing: Crossing) -> float:
    """2 sqrt(cot a cot b) / (cot a + cot b), with its normal-incidence limit."""
    a, b = crossing.alpha, crossing.beta
    if max(a, b) > np.pi / 2 - GRAZING_TOLERANCE:
        raise GrazingAngle(
            f"Crossing of interface {crossing.interface} at t={crossing.time:.4g} grazes "
            f"(alpha={a:.4f}, beta={b:.4f})"
        )
    if min(a, b) < SMALL_ANGLE:
        c1, c2 = crossing.c_up, crossing.c_down
        return 2.0 * np.sqrt(c1 * c2) / (c1 + c2)
    cot_a, cot_b = 1.0 / np.tan(a), 1.0 / np.tan(b)
    return 2.0 * np.sqrt(cot_a * cot_b) / (cot_a + cot_b)


def dt_symbol(path: RayPath) -> float:
    """Magnitude of the directly transmitted symbol: the product of transmission factors."""
    if path.termination == TIR:
        raise TIRTermination("Path ends in total internal reflection")
    return float(np.prod([transmission_factor(c) for c in path.crossings]))
