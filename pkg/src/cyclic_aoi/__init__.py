"""Exact mean age of information and near-optimal cyclic schedules for two sources with packet drops."""

from .analytic import (
    AoiBreakdown,
    Scenario,
    SourceParams,
    aoi,
    aoi_closed_form,
    aoi_general,
    weighted_aoi,
)
from .optimizer import (
    SearchResult,
    brute_force,
    insertion_search,
    near_optimal_search,
    uniform_placement,
)
from .schedule import CyclicSchedule, dual, from_slots, r_tilde, to_slots
from .simulator import ServiceModel, SimConfig, SimEstimate, simulate_cyclic, simulate_pgaw

__version__ = "0.1.0"
