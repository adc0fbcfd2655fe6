"""Cooperative salvo engagement simulator.

A deterministic multi-agent library in which interceptors synchronize their
deviated-pursuit time-to-go through super-twisting consensus guidance, while
seeker-less agents reconstruct the target state with a fixed-time distributed
observer over a directed sensing graph.
"""

__version__ = "0.1.0"

from .engagement import (
    EstimatedEngagement,
    InterceptorState,
    RelativeVariables,
    TargetState,
    estimated_engagement_variables,
    relative_variables,
    step_kinematics,
    time_to_go,
    time_to_go_rate,
    wrap_angle,
)
from .engine import (
    AgentOutcome,
    ObserverInitSpec,
    RunResult,
    RunTelemetry,
    Scenario,
    deviated_pursuit_flight,
    run,
    run_batch,
    verify_time_to_go,
)
from .errors import (
    CertificateNotFound,
    ConfigError,
    DegenerateEstimate,
    DeviationSingularity,
    InterceptionReached,
    ParseError,
    SalvoSimError,
    SpeedRatioViolation,
    TheoryViolation,
)
from .graphs import (
    ActuationGraph,
    ScalingCertificate,
    SensingGraph,
    build_actuation_graph,
    build_graphs,
    build_sensing_graph,
    check_spanning_tree,
    follower_spectrum,
    scaling_certificate,
)
from .guidance import GuidanceGains, guidance_command, nu_step, sliding_variable
from .observer import (
    ObserverGains,
    SettlingBound,
    lyapunov_value,
    observer_step,
    relative_error,
    settling_bound,
    sig,
    simulate_observer,
)
from .scenario_io import bundled_scenario_path, parse_scenario, scenario_to_dict
from .telemetry import (
    read_summary,
    result_from_dict,
    result_to_dict,
    write_summary,
    write_telemetry_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
