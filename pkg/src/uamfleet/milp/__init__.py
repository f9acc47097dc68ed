from uamfleet.milp.adapters import HighsAdapter, ScipyAdapter, SolverError, SolverLimits, get_adapter, solve
from uamfleet.milp.build import (
    DEFAULT_FLIGHT_WEIGHT,
    FLEET_SIZING,
    SPILL,
    build_fleet_sizing,
    build_spill,
    flights_flown,
    fleet_size_of,
    spill_by_step,
    spill_start,
)
from uamfleet.milp.lpformat import write_lp
from uamfleet.milp.model import Constraint, MilpModel, Solution, Status, Variable
from uamfleet.milp.sizing import solve_fleet_sizing

__all__ = [
    "Constraint", "DEFAULT_FLIGHT_WEIGHT", "FLEET_SIZING", "HighsAdapter", "MilpModel", "SPILL", "ScipyAdapter",
    "Solution", "SolverError", "SolverLimits", "Status", "Variable", "build_fleet_sizing", "build_spill",
    "flights_flown", "fleet_size_of", "get_adapter", "solve", "solve_fleet_sizing", "spill_by_step", "spill_start",
    "write_lp",
]
