"""User selection for interference-aligned MIMO interfering broadcast channels."""

from .align import (
    align_system,
    cell_sum_rate,
    design_precoder,
    effective_link,
    group_cell,
    interference_residual,
    system_sum_rate,
)
from .select import Scenario, brute_force_select, init_subsets, o_algorithm, s_algorithm
from .system import SystemConfig, generate_channels, validate_config

__version__ = "0.1.0"
