"""Super-twisting time-to-go consensus guidance.

Each interceptor broadcasts its estimate-based time-to-go over the leaderless
actuation graph. The Laplacian combination s = L @ t_go is insensitive to the
(unknown) common interception time, so driving s to zero synchronizes the
salvo without ever choosing a rendezvous time explicitly. The lateral command

    a = V * los_rate + [V (V^2 - Vt^2) cos^2(delta) / (r * v_theta)]
        * (lambda1 sqrt(|s|) sign(s) - nu),      d(nu)/dt = -lambda2 sign(s)

reduces the closed-loop time-to-go rate to exactly -1 - (lambda1 sqrt(|s|)
sign(s) - nu): pure deviated pursuit once s and nu vanish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engagement import EstimatedEngagement
from .errors import ConfigError

# Magnitude guards for the command's 1/(r * v_theta) factor; the deviation
# singularity at v_theta = 0 is otherwise harmless because saturation bounds
# the command.
RANGE_FLOOR = 1.0  # m
CROSS_SPEED_FLOOR = 0.1  # m/s


@dataclass(frozen=True)
class GuidanceGains:
    """Super-twisting gains and the lateral acceleration saturation level."""

    lambda1: float
    lambda2: float
    accel_limit: float  # m/s^2

    def __post_init__(self):
        if self.lambda1 <= 0.0 or self.lambda2 <= 0.0:
            raise ConfigError("guidance gains lambda1, lambda2 must be positive")
        if self.accel_limit <= 0.0:
            raise ConfigError("acceleration limit must be positive")


def sliding_variable(actuation, t_go: np.ndarray) -> np.ndarray:
    """Laplacian-weighted consensus variable s = L @ t_go.

    Accepts an ActuationGraph or a raw Laplacian (e.g. the reduced Laplacian
    of the still-flying agents). Zero exactly on the consensus subspace and
    invariant under a common shift of every time-to-go.
    """
    laplacian = getattr(actuation, "laplacian", actuation)
    return np.asarray(laplacian, dtype=float) @ np.asarray(t_go, dtype=float)


def _sign(value: float, smoothing: float) -> float:
    """Exact sign with sign(0) = 0, or a saturated linear zone of width smoothing."""
    if smoothing > 0.0:
        return max(-1.0, min(1.0, value / smoothing))
    return float(np.sign(value))


def pure_pursuit_accel(est: EstimatedEngagement, speed: float) -> float:
    """Pursuit term V * los_rate with the estimated LOS rate v_theta / r."""
    return speed * est.rel.v_theta / max(est.rel.r, RANGE_FLOOR)


def guidance_command(
    speed: float,
    est: EstimatedEngagement,
    s_i: float,
    nu_i: float,
    gains: GuidanceGains,
    smoothing: float = 0.0,
) -> float:
    """Saturated lateral acceleration command for one interceptor.

    Falls back to plain pursuit while the estimated target speed has not yet
    dropped below the interceptor speed (observer transient); the consensus
    correction would have the wrong sign there.
    """
    pursuit = pure_pursuit_accel(est, speed)
    if speed <= est.target_speed:
        return _clamp(pursuit, gains.accel_limit)

    r_guarded = max(est.rel.r, RANGE_FLOOR)
    v_theta = est.rel.v_theta
    v_theta_guarded = math.copysign(max(abs(v_theta), CROSS_SPEED_FLOOR), v_theta)
    gain = (
        speed
        * (speed**2 - est.target_speed**2)
        * math.cos(est.rel.delta) ** 2
        / (r_guarded * v_theta_guarded)
    )
    correction = gains.lambda1 * math.sqrt(abs(s_i)) * _sign(s_i, smoothing) - nu_i
    return _clamp(pursuit + gain * correction, gains.accel_limit)


def nu_step(nu_i: float, s_i: float, lambda2: float, dt: float, smoothing: float = 0.0) -> float:
    """Advance the super-twisting integrator one step.

    The sign is held constant over the step (the controller runs in
    lockstep with the integrator), so the explicit update is exact.
    """
    return nu_i - lambda2 * _sign(s_i, smoothing) * dt


def _clamp(value: float, limit: float) -> float:
    return max(-limit, min(limit, value))
