from .fleet import (
    ENROLLED,
    IDLE,
    NEAR_FINISH,
    NEAR_FINISH_SECONDS,
    RUNNING,
    UNENROLLED,
    WITHDRAWN,
    AvState,
    BookingRequest,
    InvariantViolation,
    NoEligibleVehicle,
    Telemetry,
    elect_vehicle,
    rank_candidates,
)
from .graph import RouteGraph, RoutingError, UnknownStop, Unreachable, compute_eta
from .scenario import (
    SCENARIO_SCHEMA,
    PolicyFileError,
    Scenario,
    ScenarioError,
    build_scenario,
    load_policies,
    load_scenario,
)
from .simulator import ActionRejected, Simulation, dump_report, run_scenario
