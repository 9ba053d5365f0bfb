"""
Open-loop vehicle models and the fixed-step integrator.

- polar_rhs: bicycle model in polar coordinates (inertial or co-rotating frame)
- cartesian_rhs: bicycle model in the plane, used as a cross-model oracle
- rk4_step: classical Runge-Kutta step with inputs held over the step
- corotating_transform: phi -> phi - omega* t
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, Sequence, Tuple
import math

import numpy as np

from .ring_geometry import RingConfig, FleetState, ConfigError, ConfigIssue

FRAMES = ("inertial", "rotating")


class IntegrationError(ArithmeticError):
    """A derivative evaluated to a non-finite value."""


@dataclass
class IntegratorConfig:
    dt: float = 1e-3
    t_end: float = 200.0
    record_every: int = 100
    # "rotating" integrates phi in the frame turning at omega*
    frame: str = "inertial"
    # recompute the controls at every RK4 stage instead of holding them
    stage_controls: bool = False

    @property
    def steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def validate(self) -> "IntegratorConfig":
        issues = []
        if not self.dt > 0:
            issues.append(ConfigIssue("dt > 0", self.dt, ">", 0.0))
        if not self.t_end >= self.dt:
            issues.append(ConfigIssue("t_end >= dt", self.t_end, ">=", self.dt))
        if not self.record_every >= 1:
            issues.append(ConfigIssue("record_every >= 1", self.record_every, ">=", 1))
        if self.frame not in FRAMES:
            issues.append(ConfigIssue(f"frame in {FRAMES}", 0.0, "==", 1.0))
        if issues:
            raise ConfigError(issues)
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {"dt": self.dt, "t_end": self.t_end, "record_every": self.record_every,
                "frame": self.frame, "stage_controls": self.stage_controls}


def control_arrays(u: Any, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Accepts an object with F/delta arrays or a sequence of per-vehicle inputs."""
    if hasattr(u, "F") and hasattr(u, "delta"):
        F, delta = np.asarray(u.F, dtype=float), np.asarray(u.delta, dtype=float)
    else:
        F = np.array([x.F for x in u], dtype=float)
        delta = np.array([x.delta for x in u], dtype=float)
    F, delta = F.reshape(-1), delta.reshape(-1)
    if F.size != n or delta.size != n:
        raise ValueError(f"expected {n} control inputs, got {F.size}")
    if np.any(np.abs(delta) >= math.pi / 2):
        raise ValueError("steering angle outside (-pi/2, pi/2)")
    return F, delta


def polar_rhs_vector(x: np.ndarray, F: np.ndarray, delta: np.ndarray,
                     sigma: np.ndarray, omega_star: float = 0.0) -> np.ndarray:
    n = x.size // 4
    r, s, v = x[:n], x[2 * n:3 * n], x[3 * n:]
    ang = v * np.cos(s) / r
    return np.concatenate([
        -v * np.sin(s),
        ang - omega_star,
        v / sigma * np.tan(delta) - ang,
        F,
    ])


def polar_rhs(w: FleetState, u: Any, cfg: RingConfig, frame: str = "inertial") -> FleetState:
    """Time derivative of w under inputs u; phi-rate is relative to the frame."""
    F, delta = control_arrays(u, w.n)
    shift = cfg.omega_star if frame == "rotating" else 0.0
    dx = polar_rhs_vector(w.as_vector(), F, delta, cfg.sigma, shift)
    return FleetState.from_vector(dx)


def cartesian_rhs(state: Sequence[float], u: Any, sigma) -> Tuple:
    """(x, y, theta, v) -> (x', y', theta', v'); scalars or per-vehicle arrays."""
    x, y, theta, v = state
    F, delta = u.F, u.delta
    if np.any(np.abs(delta) >= math.pi / 2):
        raise ValueError("steering angle outside (-pi/2, pi/2)")
    return (v * np.cos(theta), v * np.sin(theta), v / sigma * np.tan(delta), F)


def rk4_step(rhs: Callable, state, inputs, dt: float):
    """Classical RK4 with `inputs` held constant over the step (zero-order hold)."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    k1 = np.asarray(rhs(state, inputs), dtype=float)
    k2 = np.asarray(rhs(state + 0.5 * dt * k1, inputs), dtype=float)
    k3 = np.asarray(rhs(state + 0.5 * dt * k2, inputs), dtype=float)
    k4 = np.asarray(rhs(state + dt * k3, inputs), dtype=float)
    # a non-finite stage always leaves a non-finite result
    with np.errstate(invalid="ignore", over="ignore"):
        out = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise IntegrationError("non-finite derivative during RK4 stage")
    return out


def step_polar(w: FleetState, u: Any, cfg: RingConfig, dt: float,
               frame: str = "inertial") -> FleetState:
    F, delta = control_arrays(u, w.n)
    shift = cfg.omega_star if frame == "rotating" else 0.0

    def rhs(x, _):
        return polar_rhs_vector(x, F, delta, cfg.sigma, shift)

    return FleetState.from_vector(rk4_step(rhs, w.as_vector(), None, dt))


def step_cartesian(xs: np.ndarray, u: Any, sigma: np.ndarray, dt: float) -> np.ndarray:
    """One RK4 step of the planar model; xs is the (4, n) array (x, y, theta, v)."""

    def rhs(z, inputs):
        return np.array(cartesian_rhs(tuple(z), inputs, sigma))

    return rk4_step(rhs, np.asarray(xs, dtype=float), u, dt)


def corotating_transform(w: FleetState, t: float, cfg: RingConfig) -> FleetState:
    return w.replace(phi=w.phi - cfg.omega_star * t)
