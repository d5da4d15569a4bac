"""User-editable arbitration: five factors, the 3-vector theta, the fixed
6x3 mask, and the diagonal blending law between human and autonomy.

Factors live on the internal [0.1, 1] scale in steps of 0.05.  The UI scale
[10, 100] is presentation-only and converted at the gateway boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .apf import FieldParams
from .geometry import Twist

FACTOR_NAMES = ("speed", "depth_assist", "turnability", "safety", "responsiveness")

FACTOR_STEP = 0.05
FACTOR_MIN = 0.1
FACTOR_MAX = 1.0

# rows: x, y, z, roll, pitch, yaw; columns: speed, 1 - depth, turn
MASK_W = np.array([
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [1.0, 0.0, 0.0],
    [0.0, 0.2, 0.8],
    [0.4, 0.0, 0.6],
    [0.2, 0.0, 0.8],
])


def _check_factor(name: str, value: float) -> float:
    if not (FACTOR_MIN - 1e-9 <= value <= FACTOR_MAX + 1e-9):
        raise ValueError(f"{name} must lie in [{FACTOR_MIN}, {FACTOR_MAX}]")
    steps = value / FACTOR_STEP
    if abs(steps - round(steps)) > 1e-6:
        raise ValueError(f"{name} must be a multiple of {FACTOR_STEP}")
    return round(steps) * FACTOR_STEP


@dataclass(frozen=True)
class FactorSet:
    speed: float = 0.5
    depth_assist: float = 0.5
    turnability: float = 0.5
    safety: float = 0.5
    responsiveness: float = 0.5

    def __post_init__(self):
        for name in FACTOR_NAMES:
            object.__setattr__(self, name, _check_factor(name, getattr(self, name)))

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in FACTOR_NAMES}

    def to_ui_scale(self) -> dict[str, int]:
        """Internal [0.1, 1] -> presentation [10, 100]."""
        return {name: int(round(getattr(self, name) * 100)) for name in FACTOR_NAMES}


@dataclass(frozen=True)
class Theta:
    """(speed, 1 - depth_assist, turnability)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(3)
        if not (FACTOR_MIN - 1e-9 <= v[0] <= 1.0 + 1e-9):
            raise ValueError("theta[0] out of [0.1, 1]")
        if not (-1e-9 <= v[1] <= 0.9 + 1e-9):
            raise ValueError("theta[1] out of [0, 0.9]")
        if not (FACTOR_MIN - 1e-9 <= v[2] <= 1.0 + 1e-9):
            raise ValueError("theta[2] out of [0.1, 1]")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class ArbitrationMatrix:
    """Diagonal blend matrix A = diag(alpha), alpha in [0, 1]^6."""

    alpha: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float).reshape(6)
        if np.any(a < -1e-12) or np.any(a > 1.0 + 1e-12):
            raise ValueError("alpha components must lie in [0, 1]")
        object.__setattr__(self, "alpha", np.clip(a, 0.0, 1.0))

    @staticmethod
    def identity() -> "ArbitrationMatrix":
        return ArbitrationMatrix(np.ones(6))

    def as_matrix(self) -> np.ndarray:
        return np.diag(self.alpha)


def theta_from_factors(f: FactorSet) -> Theta:
    return Theta(np.array([f.speed, 1.0 - f.depth_assist, f.turnability]))


def alpha_from_theta(theta: Theta) -> ArbitrationMatrix:
    # clamp is a no-op for valid theta (rows of W sum to 1), kept defensively
    return ArbitrationMatrix(np.clip(MASK_W @ theta.values, 0.0, 1.0))


def alpha_from_factors(f: FactorSet) -> ArbitrationMatrix:
    return alpha_from_theta(theta_from_factors(f))


def blend(u_r: Twist, u_h: Twist, a: ArbitrationMatrix) -> Twist:
    """Per-axis convex combination: (1 - alpha) u_r + alpha u_h."""
    v = (1.0 - a.alpha) * u_r.as_vector() + a.alpha * u_h.as_vector()
    return Twist.from_vector(v)


def apply_factor_edit(f: FactorSet, which: str, direction: str) -> FactorSet:
    """One +/- step of 0.05 on a single factor, clamped to [0.1, 1].

    Pure; the trial-phase gating (edits only between trials) is enforced by
    the session state machine.
    """
    if which not in FACTOR_NAMES:
        raise ValueError(f"unknown factor {which!r}")
    if direction not in ("+", "-"):
        raise ValueError("direction must be '+' or '-'")
    delta = FACTOR_STEP if direction == "+" else -FACTOR_STEP
    value = getattr(f, which) + delta
    value = min(FACTOR_MAX, max(FACTOR_MIN, value))
    return replace(f, **{which: round(value / FACTOR_STEP) * FACTOR_STEP})


def apply_gain_factors(f: FactorSet, base_field: FieldParams,
                       base_stiffness: np.ndarray) -> tuple[FieldParams, np.ndarray]:
    """safety scales the field saturation, responsiveness the stiffness."""
    stiffness = f.responsiveness * np.asarray(base_stiffness, dtype=float).reshape(6)
    return base_field.scaled(f.safety), stiffness
