"""Planar engagement kinematics.

Interceptors are constant-speed point masses steered by lateral acceleration;
the target flies a straight line at constant speed. All angles are radians in
the inertial frame, wrapped to (-pi, pi]. The module provides the relative
engagement variables along/across the line of sight, the closed-form
time-to-go of deviated pursuit, its rate, and the fixed-step RK4 state update
used everywhere in the simulator.

Conventions:
- positions [m], speeds [m/s], accelerations [m/s^2], time [s]
- heading gamma is measured from the +x axis, counterclockwise positive
- deviation angle delta = interceptor heading - LOS angle
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateEstimate,
    DeviationSingularity,
    InterceptionReached,
    SpeedRatioViolation,
)

TAU = math.tau

# Treat ranges below this as coincident positions (meters).
COINCIDENCE_RADIUS = 1e-9

# Hard guard: |delta| must stay this far (radians) below pi/2 for tan(delta).
DEVIATION_GUARD = 1e-3

# Constant-velocity target dynamics: position rows integrate velocity rows,
# velocity rows are constant. Nilpotent, so RK4 integrates it exactly.
TARGET_DYNAMICS = np.array(
    [
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
    ]
)


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = math.remainder(angle, TAU)
    return math.pi if wrapped == -math.pi else wrapped


def _atan2_wrapped(y: float, x: float) -> float:
    # atan2 ranges over [-pi, pi]; fold the closed lower端 onto +pi so every
    # angle in the package lives in (-pi, pi].
    angle = math.atan2(y, x)
    return math.pi if angle == -math.pi else angle


@dataclass(frozen=True)
class InterceptorState:
    """Point-mass interceptor: position, constant speed, heading, last command."""

    x: float
    y: float
    speed: float
    heading: float
    lateral_accel: float = 0.0

    def __post_init__(self):
        if not self.speed > 0.0:
            raise ValueError(f"interceptor speed must be positive, got {self.speed}")
        object.__setattr__(self, "heading", wrap_angle(self.heading))


@dataclass(frozen=True)
class TargetState:
    """Constant-velocity target, stored as [X, Y, Xdot, Ydot]."""

    z: tuple[float, float, float, float]

    @classmethod
    def from_kinematics(
        cls, position: tuple[float, float], speed: float, heading: float
    ) -> "TargetState":
        return cls(
            (
                position[0],
                position[1],
                speed * math.cos(heading),
                speed * math.sin(heading),
            )
        )

    @property
    def position(self) -> tuple[float, float]:
        return (self.z[0], self.z[1])

    @property
    def velocity(self) -> tuple[float, float]:
        return (self.z[2], self.z[3])

    @property
    def speed(self) -> float:
        return math.hypot(self.z[2], self.z[3])

    @property
    def heading(self) -> float:
        return _atan2_wrapped(self.z[3], self.z[2])

    def as_array(self) -> np.ndarray:
        return np.array(self.z)


@dataclass(frozen=True)
class RelativeVariables:
    """Relative engagement variables of one interceptor/target pair.

    r          range [m]
    theta      line-of-sight angle [rad]
    delta      deviation angle = heading - theta, wrapped to (-pi, pi]
    v_r        relative speed along the LOS (negative while closing) [m/s]
    v_theta    relative speed across the LOS (r * LOS rate) [m/s]
    """

    r: float
    theta: float
    delta: float
    v_r: float
    v_theta: float


class _CoincidentPositions(Exception):
    def __init__(self, r: float):
        self.r = r


def _relative_from_vector(
    x: float, y: float, heading: float, speed: float, z: tuple | np.ndarray
) -> RelativeVariables:
    """Relative variables of an interceptor against a 4-vector target state.

    Shared by the true and estimate-based paths so that a perfect estimate
    reproduces the true variables bit for bit.
    """
    dx = z[0] - x
    dy = z[1] - y
    r = math.hypot(dx, dy)
    if r < COINCIDENCE_RADIUS:
        raise _CoincidentPositions(r)
    theta = _atan2_wrapped(dy, dx)
    target_speed = math.hypot(z[2], z[3])
    target_heading = _atan2_wrapped(z[3], z[2])
    delta = wrap_angle(heading - theta)
    lead = target_heading - theta
    v_r = target_speed * math.cos(lead) - speed * math.cos(delta)
    v_theta = target_speed * math.sin(lead) - speed * math.sin(delta)
    return RelativeVariables(r=r, theta=theta, delta=delta, v_r=v_r, v_theta=v_theta)


def relative_variables(
    interceptor: InterceptorState, target: TargetState
) -> RelativeVariables:
    """True relative variables. Raises InterceptionReached when positions coincide."""
    try:
        return _relative_from_vector(
            interceptor.x, interceptor.y, interceptor.heading, interceptor.speed, target.z
        )
    except _CoincidentPositions as exc:
        raise InterceptionReached(exc.r) from None


@dataclass(frozen=True)
class EstimatedEngagement:
    """Engagement variables as reconstructed from a target-state estimate."""

    target_speed: float
    target_heading: float
    rel: RelativeVariables


def estimated_engagement_variables(
    interceptor: InterceptorState, z_hat: np.ndarray
) -> EstimatedEngagement:
    """Relative variables computed against an estimated target state vector."""
    if not np.all(np.isfinite(z_hat)):
        raise DegenerateEstimate(f"non-finite estimate {z_hat}")
    try:
        rel = _relative_from_vector(
            interceptor.x, interceptor.y, interceptor.heading, interceptor.speed, z_hat
        )
    except _CoincidentPositions:
        raise DegenerateEstimate(
            "estimated target position coincides with the interceptor"
        ) from None
    return EstimatedEngagement(
        target_speed=math.hypot(z_hat[2], z_hat[3]),
        target_heading=_atan2_wrapped(z_hat[3], z_hat[2]),
        rel=rel,
    )


def _check_tgo_preconditions(rel: RelativeVariables, v_m: float, v_t: float) -> None:
    if v_m <= v_t:
        raise SpeedRatioViolation(v_m, v_t)
    if abs(rel.delta) >= math.pi / 2.0 - DEVIATION_GUARD:
        raise DeviationSingularity(rel.delta)


def time_to_go(rel: RelativeVariables, v_m: float, v_t: float) -> float:
    """Exact remaining flight time under deviated pursuit.

    Valid for an interceptor that keeps its current deviation angle fixed
    against a constant-velocity target, provided v_m > v_t and
    |delta| < pi/2:

        t_go = r * (v_r + 2 v_m cos(delta) - v_theta tan(delta)) / (v_m^2 - v_t^2)
    """
    _check_tgo_preconditions(rel, v_m, v_t)
    numerator = rel.r * (
        rel.v_r + 2.0 * v_m * math.cos(rel.delta) - rel.v_theta * math.tan(rel.delta)
    )
    return numerator / (v_m**2 - v_t**2)


def time_to_go_rate(
    rel: RelativeVariables, v_m: float, v_t: float, accel: float
) -> float:
    """Time derivative of the deviated-pursuit time-to-go for a given command.

    Equals exactly -1 under the pursuit command accel = v_m * v_theta / r;
    the command enters affinely, which is what the consensus law exploits.
    """
    _check_tgo_preconditions(rel, v_m, v_t)
    sec2 = 1.0 / math.cos(rel.delta) ** 2
    speed_margin = v_m**2 - v_t**2
    return (
        -1.0
        + rel.v_theta**2 * sec2 / speed_margin
        - rel.r * rel.v_theta * sec2 * accel / (v_m * speed_margin)
    )


def _kinematics_rk4(
    x: float, y: float, heading: float, speed: float, accel: float, dt: float
) -> tuple[float, float, float]:
    """One RK4 step of xdot = V cos(g), ydot = V sin(g), gdot = a/V with fixed a."""
    turn_rate = accel / speed

    def deriv(g: float) -> tuple[float, float, float]:
        return speed * math.cos(g), speed * math.sin(g), turn_rate

    k1 = deriv(heading)
    k2 = deriv(heading + 0.5 * dt * k1[2])
    k3 = deriv(heading + 0.5 * dt * k2[2])
    k4 = deriv(heading + dt * k3[2])
    x_new = x + dt * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) / 6.0
    y_new = y + dt * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) / 6.0
    heading_new = heading + dt * turn_rate
    return x_new, y_new, heading_new


def advance_target(z: np.ndarray, dt: float) -> np.ndarray:
    """Advance the constant-velocity target state by dt.

    The dynamics matrix is nilpotent, so z + dt*A*z is the exact flow and
    coincides with the RK4 update.
    """
    return z + dt * (TARGET_DYNAMICS @ z)


def step_kinematics(
    interceptor: InterceptorState, target: TargetState, accel: float, dt: float
) -> tuple[InterceptorState, TargetState]:
    """Advance both states one fixed step with the lateral command held constant."""
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    x, y, heading = _kinematics_rk4(
        interceptor.x, interceptor.y, interceptor.heading, interceptor.speed, accel, dt
    )
    new_interceptor = InterceptorState(
        x=x, y=y, speed=interceptor.speed, heading=heading, lateral_accel=accel
    )
    z_new = advance_target(np.asarray(target.z, dtype=float), dt)
    return new_interceptor, TargetState(tuple(z_new))
