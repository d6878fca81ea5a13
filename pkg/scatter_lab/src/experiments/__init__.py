from .commands import (
    COMMANDS,
    Artifacts,
    build_chain,
    build_experiment,
    cmd_control,
    cmd_forward,
    cmd_locate,
    cmd_reconstruct,
    cmd_regularity,
    cmd_trace,
    load_model,
)
from .sources import initial_data
