"""Benchmark toolkit for temperature-field reconstruction of heat-source systems."""

__version__ = "0.1.0"

from .layout import (DomainSpec, EdgeCondition, HeatSource, SystemSpec,  # noqa: E402
                     builtin_layout, power_field, rasterize)
from .solver import SolverConfig, assemble, solve_density, solve_field  # noqa: E402
from .sampling import sample_powers  # noqa: E402
from .observation import (MonitorSet, observe, place_monitors, tile_pois,  # noqa: E402
                          to_monitor_matrix)
from .dataset import Dataset, generate_dataset  # noqa: E402
from .metrics import MetricsReport, aggregate, build_masks, evaluate  # noqa: E402
