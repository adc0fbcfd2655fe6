import math

import numpy as np
import pytest

from salvosim.engagement import (
    EstimatedEngagement,
    RelativeVariables,
)
from salvosim.errors import ConfigError
from salvosim.graphs import build_actuation_graph
from salvosim.guidance import (
    GuidanceGains,
    guidance_command,
    nu_step,
    pure_pursuit_accel,
    sliding_variable,
)

GAINS = GuidanceGains(lambda1=5.0, lambda2=10.0, accel_limit=392.4)


def make_estimate(r=9500.0, theta=0.0, delta=0.26, v_r=-810.0, v_theta=282.0,
                  target_speed=500.0, target_heading=2.09):
    rel = RelativeVariables(r=r, theta=theta, delta=delta, v_r=v_r, v_theta=v_theta)
    return EstimatedEngagement(
        target_speed=target_speed, target_heading=target_heading, rel=rel
    )


def cycle_graph():
    return build_actuation_graph(4, [(1, 2), (2, 3), (3, 4), (4, 1)])


class TestGains:
    def test_validation(self):
        with pytest.raises(ConfigError):
            GuidanceGains(lambda1=0.0, lambda2=1.0, accel_limit=1.0)
        with pytest.raises(ConfigError):
            GuidanceGains(lambda1=1.0, lambda2=1.0, accel_limit=0.0)


class TestSlidingVariable:
    def test_consensus_subspace_maps_to_zero(self):
        s = sliding_variable(cycle_graph(), np.full(4, 12.34))
        assert np.array_equal(s, np.zeros(4))

    def test_directed_cycle_example(self):
        s = sliding_variable(cycle_graph(), np.array([10.0, 10.0, 10.0, 12.0]))
        assert s.tolist() == [-2.0, 0.0, 0.0, 2.0]

    def test_common_shift_leaves_s_unchanged(self):
        t_go = np.array([10.0, 10.0, 10.0, 12.0])
        base = sliding_variable(cycle_graph(), t_go)
        shifted = sliding_variable(cycle_graph(), t_go + 5.0)
        assert np.array_equal(base, shifted)

    def test_grid_values_shift_bitwise(self):
        # Values on a 2^-20 grid with a representable shift: the additions
        # are exact, so the Laplacian combination is identical bit for bit.
        rng = np.random.default_rng(2)
        t_go = np.round(rng.uniform(5.0, 25.0, size=4) * 2**20) / 2**20
        lap = cycle_graph()
        assert np.array_equal(sliding_variable(lap, t_go), sliding_variable(lap, t_go + 5.0))

    def test_accepts_raw_laplacian(self):
        lap = cycle_graph().laplacian.astype(float)
        t_go = np.array([1.0, 2.0, 3.0, 4.0])
        assert np.array_equal(
            sliding_variable(lap, t_go), sliding_variable(cycle_graph(), t_go)
        )


class TestGuidanceCommand:
    def test_zero_consensus_error_reduces_to_pursuit(self):
        est = make_estimate()
        a = guidance_command(580.0, est, 0.0, 0.0, GAINS)
        assert a == pytest.approx(580.0 * est.rel.v_theta / est.rel.r, rel=1e-15)
        assert a == pytest.approx(pure_pursuit_accel(est, 580.0), rel=1e-15)

    def test_saturation_clamp(self):
        est = make_estimate()
        a = guidance_command(580.0, est, 200.0, -50.0, GAINS)
        assert abs(a) <= GAINS.accel_limit
        a_neg = guidance_command(580.0, est, -200.0, 50.0, GAINS)
        assert abs(a_neg) <= GAINS.accel_limit

    def test_fallback_when_estimated_target_too_fast(self):
        est = make_estimate(target_speed=600.0)
        a = guidance_command(580.0, est, 3.0, 1.0, GAINS)
        assert a == pytest.approx(pure_pursuit_accel(est, 580.0))

    def test_cross_speed_guard_keeps_command_finite(self):
        est = make_estimate(v_theta=1e-9)
        a = guidance_command(580.0, est, 0.5, 0.0, GAINS)
        assert math.isfinite(a)
        assert abs(a) <= GAINS.accel_limit

    def test_consensus_term_direction(self):
        # Positive s with positive v_theta demands extra turn beyond pursuit.
        est = make_estimate()
        a_plus = guidance_command(580.0, est, 1.0, 0.0, GAINS)
        a_zero = guidance_command(580.0, est, 0.0, 0.0, GAINS)
        assert a_plus > a_zero


class TestNuStep:
    def test_zero_s_leaves_nu(self):
        assert nu_step(0.7, 0.0, 10.0, 1e-3) == 0.7

    def test_constant_sign_integrates_exactly(self):
        assert nu_step(0.0, 2.5, 10.0, 1e-3) == pytest.approx(-0.01, rel=1e-15)
        assert nu_step(1.0, -0.3, 10.0, 1e-3) == pytest.approx(1.01, rel=1e-15)

    def test_smoothing_scales_inside_boundary_layer(self):
        # |s| below the layer width integrates proportionally.
        step = nu_step(0.0, 0.005, 10.0, 1e-3, smoothing=0.01)
        assert step == pytest.approx(-10.0 * 0.5 * 1e-3, rel=1e-12)
        # outside the layer it saturates to the exact sign
        step = nu_step(0.0, 5.0, 10.0, 1e-3, smoothing=0.01)
        assert step == pytest.approx(-0.01, rel=1e-12)
