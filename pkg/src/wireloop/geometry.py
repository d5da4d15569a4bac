"""Rigid-body value types and the pose arithmetic used by every controller.

Conventions: world frame with x = along-wire travel, y = depth (line of
sight), z = vertical.  Quaternions are stored (w, x, y, z) and kept at unit
norm.  6-vectors are laid out [linear; angular] everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_QUAT_NORM_TOL = 1e-9


def _as_vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(3)
    return a


def quat_normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(4)
    n = np.linalg.norm(q)
    if n == 0.0:
        raise ValueError("zero quaternion")
    return q / n


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vector v by unit quaternion q."""
    qv = np.array([0.0, v[0], v[1], v[2]])
    r = quat_multiply(quat_multiply(q, qv), quat_conjugate(q))
    return r[1:]


def quat_exp(rotvec: np.ndarray) -> np.ndarray:
    """Unit quaternion for a rotation vector (axis * angle)."""
    angle = np.linalg.norm(rotvec)
    if angle < 1e-12:
        # first-order expansion keeps the map smooth near zero
        q = np.array([1.0, 0.5 * rotvec[0], 0.5 * rotvec[1], 0.5 * rotvec[2]])
        return quat_normalize(q)
    axis = rotvec / angle
    half = 0.5 * angle
    return np.concatenate(([np.cos(half)], np.sin(half) * axis))


def quat_log(q: np.ndarray) -> np.ndarray:
    """Rotation vector of a unit quaternion, shortest arc (angle <= pi)."""
    q = np.asarray(q, dtype=float).reshape(4)
    if q[0] < 0.0:
        q = -q
    w = min(1.0, max(-1.0, q[0]))
    sin_half = np.linalg.norm(q[1:])
    if sin_half < 1e-12:
        return 2.0 * q[1:]
    angle = 2.0 * np.arctan2(sin_half, w)
    return (angle / sin_half) * q[1:]


def quat_from_two_vectors(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Shortest-arc quaternion rotating direction a onto direction b."""
    a = _as_vec3(a) / np.linalg.norm(a)
    b = _as_vec3(b) / np.linalg.norm(b)
    c = np.cross(a, b)
    d = float(np.dot(a, b))
    if d < -1.0 + 1e-12:
        # antiparallel: rotate pi about any axis orthogonal to a
        axis = np.cross(a, np.array([1.0, 0.0, 0.0]))
        if np.linalg.norm(axis) < 1e-9:
            axis = np.cross(a, np.array([0.0, 1.0, 0.0]))
        axis /= np.linalg.norm(axis)
        return np.concatenate(([0.0], axis))
    q = np.concatenate(([1.0 + d], c))
    return quat_normalize(q)


@dataclass(frozen=True)
class Pose:
    """Position (m) and unit-quaternion orientation in the world frame."""

    position: np.ndarray
    orientation: np.ndarray = field(
        default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))

    def __post_init__(self):
        object.__setattr__(self, "position", _as_vec3(self.position))
        q = np.asarray(self.orientation, dtype=float).reshape(4)
        if abs(np.linalg.norm(q) - 1.0) > 1e-6:
            raise ValueError("orientation quaternion is not unit-norm")
        object.__setattr__(self, "orientation", quat_normalize(q))

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.zeros(3))


@dataclass(frozen=True)
class Twist:
    """Linear (m/s) and angular (rad/s) velocity."""

    linear: np.ndarray
    angular: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "linear", _as_vec3(self.linear))
        object.__setattr__(self, "angular", _as_vec3(self.angular))
        if not (np.all(np.isfinite(self.linear)) and np.all(np.isfinite(self.angular))):
            raise ValueError("non-finite twist")

    @staticmethod
    def zero() -> "Twist":
        return Twist(np.zeros(3), np.zeros(3))

    @staticmethod
    def from_vector(v) -> "Twist":
        v = np.asarray(v, dtype=float).reshape(6)
        return Twist(v[:3], v[3:])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.linear, self.angular])


@dataclass(frozen=True)
class Wrench:
    """Force (N) and torque (N m)."""

    force: np.ndarray
    torque: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "force", _as_vec3(self.force))
        object.__setattr__(self, "torque", _as_vec3(self.torque))
        if not (np.all(np.isfinite(self.force)) and np.all(np.isfinite(self.torque))):
            raise ValueError("non-finite wrench")

    @staticmethod
    def zero() -> "Wrench":
        return Wrench(np.zeros(3), np.zeros(3))

    @staticmethod
    def from_vector(v) -> "Wrench":
        v = np.asarray(v, dtype=float).reshape(6)
        return Wrench(v[:3], v[3:])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.force, self.torque])


@dataclass(frozen=True)
class PoseError:
    """6-vector error: translation (m) then axis-angle rotation (rad)."""

    e: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "e", np.asarray(self.e, dtype=float).reshape(6))

    @staticmethod
    def zero() -> "PoseError":
        return PoseError(np.zeros(6))


def pose_error(target: Pose, current: Pose) -> PoseError:
    """Error pulling `current` toward `target`.

    Translation is a plain difference; rotation is the axis-angle of the
    relative rotation target * current^-1 (shortest arc).
    """
    dp = target.position - current.position
    dq = quat_multiply(target.orientation, quat_conjugate(current.orientation))
    return PoseError(np.concatenate([dp, quat_log(dq)]))


def integrate_pose(p: Pose, v: Twist, dt: float) -> Pose:
    """Explicit Euler step of a world-frame twist."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    position = p.position + v.linear * dt
    dq = quat_exp(v.angular * dt)
    orientation = quat_normalize(quat_multiply(dq, p.orientation))
    return Pose(position, orientation)


def octagon_points(handle_pose: Pose, ring_radius: float) -> np.ndarray:
    """Eight evenly spaced ring vertices in the world frame, shape (8, 3).

    Vertex k sits at angle k*45 deg in the handle's local x-y plane (the
    ring plane; local z is the ring normal).  Order is stable.
    """
    if ring_radius <= 0.0:
        raise ValueError("ring_radius must be positive")
    rot = rotation_matrix(handle_pose.orientation)
    return (ring_radius * _OCTAGON_UNIT) @ rot.T + handle_pose.position


_OCTAGON_ANGLES = np.arange(8) * (np.pi / 4.0)
_OCTAGON_UNIT = np.stack([
    np.cos(_OCTAGON_ANGLES), np.sin(_OCTAGON_ANGLES), np.zeros(8)], axis=1)


def rotation_matrix(q: np.ndarray) -> np.ndarray:
    """3x3 rotation matrix of a unit quaternion."""
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])
