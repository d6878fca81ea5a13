from .edges import Edge, detect_jumps, richardson
from .recovery import (
    EnergyScan,
    InterfaceJump,
    InterfaceReport,
    KEMeasurement,
    Probe,
    energy_scan,
    ke_profile,
    measure_ke,
    scan_and_locate,
    setup_probe,
)
