from .cauchy import (
    CauchyPair,
    Medium,
    energy,
    energy_inner_product,
    energy_norm,
    kinetic_energy,
    potential_energy,
    time_reverse,
)
from .solver import WaveField, propagate, run, stable_dt
from .measurement import Experiment, OutsideView, observe
