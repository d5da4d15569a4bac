"""Discrete-time admittance controllers for the human and autonomy channels,
and the combined per-tick control step.

Both channels are explicit-Euler integrals at a fixed timestep with
componentwise anti-windup clamps and an optional exponential leak.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arbitration import ArbitrationMatrix, blend
from .geometry import Pose, PoseError, Twist, Wrench, integrate_pose, pose_error

DEFAULT_DT = 0.01  # s, 100 Hz


def _vec6(v, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(6)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    return a


@dataclass(frozen=True)
class AdmittanceParams:
    """Virtual mass / stiffness / damping plus safety limits."""

    mass: np.ndarray = field(
        default_factory=lambda: np.array([1.0, 1.0, 1.0, 0.01, 0.01, 0.01]))
    stiffness: np.ndarray = field(default_factory=lambda: np.full(6, 50.0))
    damping: np.ndarray = field(default_factory=lambda: np.full(6, 10.0))
    velocity_limit: np.ndarray = field(
        default_factory=lambda: np.array([0.5, 0.5, 0.5, 2.0, 2.0, 2.0]))
    windup_limit: float = 10.0
    leak: float = 0.0  # 1/s, exponential accumulator decay (0 = pure integral)

    def __post_init__(self):
        for name in ("mass", "stiffness", "damping", "velocity_limit"):
            object.__setattr__(self, name, _vec6(getattr(self, name), name))
        if np.any(self.mass <= 0.0):
            raise ValueError("mass components must be positive")
        if np.any(self.stiffness < 0.0) or np.any(self.damping < 0.0):
            raise ValueError("stiffness and damping must be non-negative")
        if self.windup_limit <= 0.0 or self.leak < 0.0:
            raise ValueError("bad windup_limit or leak")


@dataclass
class IntegratorState:
    """Mutable per-trial controller memory; reset at every trial start."""

    accum_h: np.ndarray = field(default_factory=lambda: np.zeros(6))
    accum_r: np.ndarray = field(default_factory=lambda: np.zeros(6))
    prev_e: PoseError | None = None

    def reset(self) -> None:
        self.accum_h = np.zeros(6)
        self.accum_r = np.zeros(6)
        self.prev_e = None


def _leak_factor(params: AdmittanceParams, dt: float) -> float:
    return float(np.exp(-params.leak * dt)) if params.leak > 0.0 else 1.0


def human_command(e: PoseError, e_dot: np.ndarray, params: AdmittanceParams,
                  state: IntegratorState, dt: float) -> Twist:
    """Human channel: velocity = M^-1 * integral of (k*e + d*de/dt)."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    acc = state.accum_h * _leak_factor(params, dt)
    acc = acc + (params.stiffness * e.e + params.damping * _vec6(e_dot, "e_dot")) * dt
    acc = np.clip(acc, -params.windup_limit, params.windup_limit)
    state.accum_h = acc
    v = np.clip(acc / params.mass, -params.velocity_limit, params.velocity_limit)
    return Twist.from_vector(v)


def autonomy_command(w_a: Wrench, params: AdmittanceParams,
                     state: IntegratorState, dt: float) -> Twist:
    """Autonomy channel: velocity = M^-1 * integral of the assistive wrench."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    acc = state.accum_r * _leak_factor(params, dt)
    acc = acc + w_a.as_vector() * dt
    acc = np.clip(acc, -params.windup_limit, params.windup_limit)
    state.accum_r = acc
    v = np.clip(acc / params.mass, -params.velocity_limit, params.velocity_limit)
    return Twist.from_vector(v)


def control_tick(handle_input: Pose, robot: Pose, w_a: Wrench,
                 a: ArbitrationMatrix, params: AdmittanceParams,
                 state: IntegratorState, dt: float
                 ) -> tuple[Twist, Twist, Twist, Pose]:
    """One 100 Hz step: error, both channels, blend, integrate.

    Returns (u_sc, u_h, u_r, new robot pose).  de/dt is a backward
    difference of the pose error; the first tick of a trial uses zero.
    """
    e = pose_error(handle_input, robot)
    if state.prev_e is None:
        e_dot = np.zeros(6)
    else:
        e_dot = (e.e - state.prev_e.e) / dt
    u_h = human_command(e, e_dot, params, state, dt)
    u_r = autonomy_command(w_a, params, state, dt)
    u_sc = blend(u_r, u_h, a)
    state.prev_e = e
    return u_sc, u_h, u_r, integrate_pose(robot, u_sc, dt)
