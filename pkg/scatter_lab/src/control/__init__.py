from .scattering import (
    GLASS_BOX,
    MODES,
    OUTSIDE,
    ControlRun,
    adt_ground_truth,
    adt_recovered,
    energy_report,
    iterate,
)
