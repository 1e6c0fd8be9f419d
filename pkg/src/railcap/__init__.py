"""Transport capacity of fixed railway timetables under reduced seat capacity."""
from railcap.assess import Scenario, ScenarioResult, run_scenario, run_sweep, scenario_grid
from railcap.config import AssessConfig, SolverConfig
from railcap.network import (
    CapacityRegime,
    Link,
    ModelInputs,
    ODPair,
    ServiceNetwork,
    Station,
    Train,
    apply_capacity_regime,
    build_from_inputs,
    build_service_network,
    filter_demand,
    validate_timetable,
)
from railcap.solver import FlowSolution, solve_master, solve_with_column_generation

__version__ = "0.1.0"
