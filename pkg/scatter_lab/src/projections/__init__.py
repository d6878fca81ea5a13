from .harmonic import (
    ProjectionContext,
    harmonic_extension,
    project_data_space,
    project_inside,
    project_outside,
)
