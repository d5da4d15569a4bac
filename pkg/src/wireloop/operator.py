"""Scripted operator policies: reproducible stand-ins for the human subject.

A policy runs pure pursuit along the wire centerline at a nominal speed,
keeps the ring plane normal to the local wire tangent, and adds seeded,
amplitude-clamped tremor (a sum of two sinusoids) on top.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .course import WireCourse
from .geometry import Pose, quat_from_two_vectors


@dataclass(frozen=True)
class OperatorPolicy:
    lookahead: float = 0.06          # m along the wire
    nominal_speed: float = 0.06      # m/s
    tremor_amplitude: float = 0.0    # m, hard bound on position deviation
    tremor_frequency: float = 2.0    # Hz, base tremor frequency
    reaction_delay: float = 0.0      # s, zero-order hold on observations
    noise_seed: int = 0

    def __post_init__(self):
        if self.lookahead <= 0.0:
            raise ValueError("lookahead must be positive")
        if self.tremor_amplitude < 0.0 or self.reaction_delay < 0.0:
            raise ValueError("tremor_amplitude and reaction_delay must be >= 0")


PRESETS: dict[str, OperatorPolicy] = {
    "expert": OperatorPolicy(
        lookahead=0.07, nominal_speed=0.08, tremor_amplitude=0.0,
        reaction_delay=0.0),
    "typical": OperatorPolicy(
        lookahead=0.07, nominal_speed=0.08, tremor_amplitude=0.045,
        tremor_frequency=0.6, reaction_delay=0.1),
    "novice": OperatorPolicy(
        lookahead=0.06, nominal_speed=0.06, tremor_amplitude=0.055,
        tremor_frequency=0.8, reaction_delay=0.25),
}


class ScriptedOperator:
    """Stateful runner for an OperatorPolicy; one instance per trial."""

    def __init__(self, policy: OperatorPolicy, seed_offset: int = 0):
        self.policy = policy
        self._seed_offset = seed_offset
        self.reset()

    def reset(self) -> None:
        rng = np.random.default_rng(self.policy.noise_seed + self._seed_offset)
        # two incommensurate tremor components per axis, seeded phases
        self._phases = rng.uniform(0.0, 2.0 * np.pi, size=(2, 3))
        self._freqs = np.array([
            self.policy.tremor_frequency,
            1.9 * self.policy.tremor_frequency + 0.31,
        ])
        self._base_pos: np.ndarray | None = None
        self._obs_buffer: list[tuple[float, Pose]] = []

    def _delayed_observation(self, observed_robot: Pose, t: float) -> Pose:
        self._obs_buffer.append((t, observed_robot))
        cutoff = t - self.policy.reaction_delay
        chosen = self._obs_buffer[0][1]
        keep_from = 0
        for i, (ti, pose) in enumerate(self._obs_buffer):
            if ti <= cutoff:
                chosen = pose
                keep_from = i
            else:
                break
        del self._obs_buffer[:keep_from]
        return chosen

    def _tremor(self, t: float) -> np.ndarray:
        if self.policy.tremor_amplitude == 0.0:
            return np.zeros(3)
        half = 0.5 * self.policy.tremor_amplitude
        w = 2.0 * np.pi * self._freqs
        return half * (np.sin(w[0] * t + self._phases[0])
                       + np.sin(w[1] * t + self._phases[1]))

    def step(self, observed_robot: Pose, course: WireCourse,
             t: float, dt: float) -> Pose:
        """Next handle input pose for the controller to track."""
        obs = self._delayed_observation(observed_robot, t)
        if self._base_pos is None:
            self._base_pos = obs.position.copy()

        _, arc = course.dense_samples()
        _, idx = course.kdtree().query(obs.position)
        s_target = min(float(arc[int(idx)]) + self.policy.lookahead, float(arc[-1]))
        target = course.point_at(s_target)

        to_target = target - self._base_pos
        dist = float(np.linalg.norm(to_target))
        step_len = self.policy.nominal_speed * dt
        if dist > 1e-12:
            self._base_pos = self._base_pos + to_target * min(1.0, step_len / dist)

        tangent = course.tangent_at(s_target)
        orientation = quat_from_two_vectors(np.array([0.0, 0.0, 1.0]), tangent)
        return Pose(self._base_pos + self._tremor(t), orientation)
