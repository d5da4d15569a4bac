"""Assist-as-needed heuristic: between trials, move theta toward the level
of assistance an expert demonstration needed.

The per-trial performance error is the mean assistive wrench pulled back
through the pseudo-inverse of the arbitration mask; theta is updated
multiplicatively with a bounded nominal change rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arbitration import MASK_W, Theta
from .geometry import Wrench

_EPS = 1e-9

_W_PINV = np.linalg.pinv(MASK_W)


class ReferenceError(RuntimeError):
    """Expert reference generation failed (unsuccessful demo trial)."""


def pinv_mask() -> np.ndarray:
    """Moore-Penrose pseudo-inverse of the fixed 6x3 arbitration mask."""
    return _W_PINV.copy()


def trial_error(mean_wrench: Wrench) -> np.ndarray:
    """Per-trial performance error: least-squares pullback of the mean wrench."""
    return _W_PINV @ mean_wrench.as_vector()


def change_rate(r_now: np.ndarray, r_prev: np.ndarray | None,
                r_d: np.ndarray, chi_nom: float) -> np.ndarray:
    """Componentwise change rate from the two most recent trial errors.

    The ratio factor compares progress toward r_d against the previous
    trial; it is taken as 1 on the first trial or when the previous error
    already coincides with r_d.
    """
    r_now = np.asarray(r_now, dtype=float).reshape(3)
    r_d = np.asarray(r_d, dtype=float).reshape(3)
    if np.any(r_d == 0.0):
        raise ValueError("r_d components must be nonzero")
    chi = np.zeros(3)
    for i in range(3):
        diff = r_now[i] - r_d[i]
        if diff == 0.0:
            continue  # exact match: no change, ratio power left unevaluated
        if r_prev is None or abs(r_prev[i] - r_d[i]) < _EPS:
            ratio = 1.0
        else:
            ratio = abs(diff) / abs(r_prev[i] - r_d[i])
        chi[i] = chi_nom * (diff / r_d[i]) * ratio ** np.sign(-diff)
    return chi


@dataclass
class AdaptState:
    theta: Theta
    r_desired: np.ndarray
    chi_nom: float = 0.1
    r_prev: np.ndarray | None = None
    trial_index: int = 0
    last_chi: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.r_desired = np.asarray(self.r_desired, dtype=float).reshape(3)
        if not (0.0 < self.chi_nom < 1.0):
            raise ValueError("chi_nom must lie in (0, 1)")


def update_theta(state: AdaptState, r_now: np.ndarray) -> AdaptState:
    """Apply one between-trial update; returns a new state."""
    chi = change_rate(r_now, state.r_prev, state.r_desired, state.chi_nom)
    raw = (1.0 + chi) * state.theta.values
    clamped = np.array([
        np.clip(raw[0], 0.1, 1.0),
        np.clip(raw[1], 0.0, 0.9),
        np.clip(raw[2], 0.1, 1.0),
    ])
    return AdaptState(
        theta=Theta(clamped),
        r_desired=state.r_desired,
        chi_nom=state.chi_nom,
        r_prev=np.asarray(r_now, dtype=float).reshape(3).copy(),
        trial_index=state.trial_index + 1,
        last_chi=chi,
    )


def expert_reference(expert_log) -> np.ndarray:
    """Desired error r_d from a successful scripted-expert trial log."""
    from .session import Outcome
    if expert_log.outcome is not Outcome.SUCCESS:
        raise ReferenceError(
            f"expert demonstration did not succeed (outcome {expert_log.outcome})")
    wrenches = np.array([rec.w_a.as_vector() for rec in expert_log.records])
    if len(wrenches) == 0:
        raise ReferenceError("expert demonstration log is empty")
    r_d = _W_PINV @ wrenches.mean(axis=0)
    if np.any(r_d == 0.0):
        import warnings
        warnings.warn(
            "expert reference has a zero component; the change-rate law "
            "divides by r_d", RuntimeWarning)
    return r_d
