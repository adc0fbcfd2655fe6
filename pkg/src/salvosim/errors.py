"""Exception types shared across the simulator."""

from __future__ import annotations


class SalvoSimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(SalvoSimError):
    """Invalid graph or scenario configuration (bad indices, gains, speeds)."""


class ParseError(SalvoSimError):
    """Scenario file failed validation.

    Carries the offending field paths so callers can report exactly which
    entries are wrong.
    """

    def __init__(self, errors: list[str] | str):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class InterceptionReached(SalvoSimError):
    """Interceptor and target positions coincide; carries the final range."""

    def __init__(self, final_range: float):
        self.final_range = final_range
        super().__init__(f"positions coincide (range {final_range:.3e} m)")


class SpeedRatioViolation(SalvoSimError):
    """Interceptor speed does not exceed (estimated) target speed."""

    def __init__(self, interceptor_speed: float, target_speed: float):
        self.interceptor_speed = interceptor_speed
        self.target_speed = target_speed
        super().__init__(
            f"interceptor speed {interceptor_speed:.3f} m/s must exceed "
            f"target speed {target_speed:.3f} m/s"
        )


class DeviationSingularity(SalvoSimError):
    """Deviation angle too close to +/-90 deg for the time-to-go expression."""

    def __init__(self, deviation: float):
        self.deviation = deviation
        super().__init__(f"deviation angle {deviation:.6f} rad too close to pi/2")


class DegenerateEstimate(SalvoSimError):
    """Estimated target position coincides with the interceptor position."""


class CertificateNotFound(SalvoSimError):
    """No positive diagonal scaling verified the follower Laplacian inequality."""


class TheoryViolation(SalvoSimError):
    """A structural property guaranteed by the graph theory failed numerically."""
