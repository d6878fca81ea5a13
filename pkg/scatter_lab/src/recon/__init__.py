from .kappa import (
    HarmonicPair,
    PointEstimate,
    ReconstructedChart,
    SpeedProfile,
    build_chart,
    kappa,
    reconstruct_point,
    reconstruct_speed,
)
from .redatum import redatum, redatum_experiment, two_stage_reconstruction
