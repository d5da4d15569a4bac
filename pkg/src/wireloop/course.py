"""Buzz-wire game world: wire geometry, the loop handle, synthetic
environment points, contact detection, and trial progress.

The wire is a polyline with a radius (capsule chain); the handle is a torus
proxy described by its ring circle and tube radius.  All distance queries go
through a dense 1 mm resampling of the centerline, cached per course.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import yaml
from scipy.spatial import cKDTree

from .geometry import Pose, octagon_points

DENSE_RESOLUTION = 0.001  # m, centerline and ring-circle sampling step

COURSE_SCHEMA_VERSION = 1


class CourseFormatError(ValueError):
    """Malformed course descriptor; the message names the offending field."""


class PointClass(Enum):
    ATTRACTIVE = "attractive"
    REPULSIVE = "repulsive"


@dataclass(frozen=True)
class WireCourse:
    """Wire polyline with radius and the start/end arc-length marks."""

    name: str
    centerline: np.ndarray  # (N, 3)
    wire_radius: float
    start_s: float
    end_s: float
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.centerline, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 2:
            raise CourseFormatError("points: need at least two 3-D points")
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        if np.any(seg <= 0.0):
            raise CourseFormatError("points: consecutive points must be distinct")
        if self.wire_radius <= 0.0:
            raise CourseFormatError("wire_radius: must be positive")
        total = float(seg.sum())
        if not (0.0 <= self.start_s < self.end_s <= total + 1e-9):
            raise CourseFormatError(
                "start_s/end_s: need 0 <= start_s < end_s <= total length")
        object.__setattr__(self, "centerline", pts)

    @property
    def total_length(self) -> float:
        return float(np.linalg.norm(np.diff(self.centerline, axis=0), axis=1).sum())

    def dense_samples(self) -> tuple[np.ndarray, np.ndarray]:
        """(points, arc_s) resampled at DENSE_RESOLUTION along the wire."""
        if "dense" not in self._cache:
            seg = np.linalg.norm(np.diff(self.centerline, axis=0), axis=1)
            s_knots = np.concatenate([[0.0], np.cumsum(seg)])
            n = max(2, int(np.ceil(s_knots[-1] / DENSE_RESOLUTION)) + 1)
            s = np.linspace(0.0, s_knots[-1], n)
            pts = np.stack([
                np.interp(s, s_knots, self.centerline[:, i]) for i in range(3)
            ], axis=1)
            self._cache["dense"] = (pts, s)
        return self._cache["dense"]

    def kdtree(self) -> cKDTree:
        if "tree" not in self._cache:
            self._cache["tree"] = cKDTree(self.dense_samples()[0])
        return self._cache["tree"]

    def tangent_at(self, s: float) -> np.ndarray:
        """Unit tangent of the polyline at arc length s."""
        pts, arc = self.dense_samples()
        i = min(max(int(np.searchsorted(arc, s)), 1), len(arc) - 1)
        t = pts[i] - pts[i - 1]
        return t / np.linalg.norm(t)

    def point_at(self, s: float) -> np.ndarray:
        pts, arc = self.dense_samples()
        s = min(max(float(s), 0.0), float(arc[-1]))
        i = min(max(int(np.searchsorted(arc, s)), 1), len(arc) - 1)
        w = (s - arc[i - 1]) / (arc[i] - arc[i - 1])
        return (1.0 - w) * pts[i - 1] + w * pts[i]


@dataclass(frozen=True)
class LoopHandle:
    """Ring end-effector: pose of the ring center plus ring/tube radii."""

    pose: Pose
    ring_radius: float
    tube_radius: float
    com_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if self.tube_radius <= 0.0:
            raise ValueError("tube_radius must be positive")
        object.__setattr__(
            self, "com_offset", np.asarray(self.com_offset, dtype=float).reshape(3))

    def validate_against(self, course: WireCourse) -> None:
        if self.ring_radius <= course.wire_radius + self.tube_radius:
            raise ValueError("wire cannot pass through the loop")

    def control_points(self) -> np.ndarray:
        # cached: queried several times per tick for the same handle
        cps = self.__dict__.get("_cps")
        if cps is None:
            cps = octagon_points(self.pose, self.ring_radius)
            object.__setattr__(self, "_cps", cps)
        return cps

    def com_world(self) -> np.ndarray:
        from .geometry import quat_rotate
        return self.pose.position + quat_rotate(self.pose.orientation, self.com_offset)

    def ring_circle(self, resolution: float = DENSE_RESOLUTION) -> np.ndarray:
        """Dense sampling of the ring circle (tube centerline) in world frame."""
        key = (self.ring_radius, resolution)
        local = _RING_TEMPLATES.get(key)
        if local is None:
            n = max(8, int(np.ceil(2.0 * np.pi * self.ring_radius / resolution)))
            ang = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
            local = np.stack([
                self.ring_radius * np.cos(ang),
                self.ring_radius * np.sin(ang),
                np.zeros(n),
            ], axis=1)
            _RING_TEMPLATES[key] = local
        from .geometry import rotation_matrix
        rot = rotation_matrix(self.pose.orientation)
        return local @ rot.T + self.pose.position


_RING_TEMPLATES: dict[tuple[float, float], np.ndarray] = {}


@dataclass(frozen=True)
class EnvironmentPoint:
    position: np.ndarray
    point_class: PointClass
    arc_s: float

    def __post_init__(self):
        object.__setattr__(
            self, "position", np.asarray(self.position, dtype=float).reshape(3))


@dataclass(frozen=True)
class NeighborhoodSet:
    attractive: tuple[EnvironmentPoint, ...]
    repulsive: tuple[EnvironmentPoint, ...]

    @property
    def size(self) -> int:
        return len(self.attractive) + len(self.repulsive)

    def position_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(attractive, repulsive) positions stacked as (N, 3) arrays, cached."""
        cached = self.__dict__.get("_arrays")
        if cached is None:
            att = np.array([p.position for p in self.attractive],
                           dtype=float).reshape(-1, 3)
            rep = np.array([p.position for p in self.repulsive],
                           dtype=float).reshape(-1, 3)
            cached = (att, rep)
            object.__setattr__(self, "_arrays", cached)
        return cached

    @staticmethod
    def empty() -> "NeighborhoodSet":
        return NeighborhoodSet((), ())


@dataclass(frozen=True)
class ContactReport:
    in_contact: bool
    penetration: float
    proxy_force: float
    fatal: bool


def _dist_to_ring_circle(points: np.ndarray, handle: LoopHandle) -> np.ndarray:
    """Exact distance from each point to the ring circle (a 3-D circle)."""
    from .geometry import rotation_matrix
    rot = rotation_matrix(handle.pose.orientation)
    local = (points - handle.pose.position) @ rot  # world -> local
    radial = np.linalg.norm(local[:, :2], axis=1)
    return np.sqrt((radial - handle.ring_radius) ** 2 + local[:, 2] ** 2)


def sample_environment(course: WireCourse, handle: LoopHandle,
                       spacing: float, in_range: float) -> NeighborhoodSet:
    """Synthetic stand-in for depth-camera sensing of the wire.

    Centerline samples within `in_range` of any octagon control point form
    the neighborhood.  A point whose nearest handle feature is the ring tube
    is repulsive; one nearest the ring center is attractive (it keeps the
    loop centered on the wire).
    """
    if spacing <= 0.0 or in_range <= 0.0:
        raise ValueError("spacing and range must be positive")
    key = ("spaced", spacing)
    if key not in course._cache:
        dense_pts, dense_arc = course.dense_samples()
        step = max(1, int(round(spacing / DENSE_RESOLUTION)))
        course._cache[key] = (dense_pts[::step], dense_arc[::step])
    pts, arc = course._cache[key]

    # coarse cut first: a sample can only be within `in_range` of a control
    # point if it is within in_range + ring_radius of the ring center
    d_center = np.linalg.norm(pts - handle.pose.position, axis=1)
    coarse = d_center <= in_range + handle.ring_radius
    if not np.any(coarse):
        return NeighborhoodSet.empty()
    pts = pts[coarse]
    arc = arc[coarse]
    d_center = d_center[coarse]

    cps = handle.control_points()
    diff = pts[:, None, :] - cps[None, :, :]
    d_cp = np.sqrt(np.min(np.einsum("nkc,nkc->nk", diff, diff), axis=1))
    mask = d_cp <= in_range
    if not np.any(mask):
        return NeighborhoodSet.empty()
    pts = pts[mask]
    arc = arc[mask]
    d_center = d_center[mask]

    d_circle = _dist_to_ring_circle(pts, handle)
    repulsive_mask = d_circle < d_center

    att_pts = pts[~repulsive_mask]
    rep_pts = pts[repulsive_mask]
    att = tuple(
        EnvironmentPoint(p, PointClass.ATTRACTIVE, float(s))
        for p, s in zip(att_pts, arc[~repulsive_mask]))
    rep = tuple(
        EnvironmentPoint(p, PointClass.REPULSIVE, float(s))
        for p, s in zip(rep_pts, arc[repulsive_mask]))
    nbhd = NeighborhoodSet(att, rep)
    # the stacked arrays already exist here; seed the cache the force
    # synthesis reads every tick
    object.__setattr__(nbhd, "_arrays", (att_pts, rep_pts))
    return nbhd


def check_contact(course: WireCourse, handle: LoopHandle,
                  k_wire: float = 1000.0, fatal_force: float = 1.0) -> ContactReport:
    """Torus/capsule proximity test with a spring proxy force.

    penetration = max(0, wire_radius + tube_radius - min distance between
    the ring circle and the wire centerline sampled at 1 mm).  Only wire
    samples within ring_radius + contact threshold of the ring center can
    touch the tube (point-to-circle distance >= point-to-center distance -
    ring_radius), so the exact circle distance is evaluated just for those.
    """
    if k_wire <= 0.0 or fatal_force <= 0.0:
        raise ValueError("k_wire and fatal_force must be positive")
    threshold = course.wire_radius + handle.tube_radius
    idx = course.kdtree().query_ball_point(
        handle.pose.position, handle.ring_radius + threshold)
    if idx:
        near = course.dense_samples()[0][idx]
        min_dist = float(np.min(_dist_to_ring_circle(near, handle)))
        penetration = max(0.0, threshold - min_dist)
    else:
        penetration = 0.0
    proxy_force = k_wire * penetration
    return ContactReport(
        in_contact=penetration > 0.0,
        penetration=penetration,
        proxy_force=proxy_force,
        fatal=proxy_force > fatal_force,
    )


def progress(course: WireCourse, handle: LoopHandle) -> float:
    """Fraction of the start->end span covered by the nearest-wire point."""
    _, arc = course.dense_samples()
    _, idx = course.kdtree().query(handle.pose.position)
    s = arc[int(idx)]
    frac = (s - course.start_s) / (course.end_s - course.start_s)
    return min(max(float(frac), 0.0), 1.0)


def buzz_events(contact_stream, debounce: float, dt: float) -> int:
    """Count debounced rising edges of in_contact over a fixed-rate stream."""
    count = 0
    last_edge_t = None
    prev = False
    for i, report in enumerate(contact_stream):
        t = i * dt
        if report.in_contact and not prev:
            if last_edge_t is None or (t - last_edge_t) >= debounce:
                count += 1
            last_edge_t = t
        prev = report.in_contact
    return count


def _smooth_curve(control: np.ndarray, n: int) -> np.ndarray:
    """Resample a coarse control polygon into a smooth dense polyline."""
    from scipy.interpolate import make_interp_spline
    t = np.linspace(0.0, 1.0, len(control))
    spline = make_interp_spline(t, control, k=3)
    return spline(np.linspace(0.0, 1.0, n))


def _builtin_training() -> dict:
    # gentle S-curve in x with vertical and depth undulation
    x = np.linspace(0.0, 1.0, 9)
    z = 0.06 * np.sin(2.0 * np.pi * x * 1.0)
    y = 0.04 * np.sin(2.0 * np.pi * x * 0.5 + 0.7)
    control = np.stack([x, y, z], axis=1)
    pts = _smooth_curve(control, 60)
    return {
        "version": COURSE_SCHEMA_VERSION,
        "name": "training",
        "points": [[float(c) for c in p] for p in pts],
        "wire_radius": 0.002,
        "start_s": 0.05,
        "end_s": None,  # filled below: total - 0.05
    }


def _builtin_transfer() -> dict:
    # tighter double bend, distinct from the training shape
    x = np.linspace(0.0, 0.9, 9)
    z = 0.08 * np.sin(2.0 * np.pi * x * 1.4 + 0.3)
    y = 0.05 * np.cos(2.0 * np.pi * x * 0.8)
    y -= y[0]
    z -= z[0]
    control = np.stack([x, y, z], axis=1)
    pts = _smooth_curve(control, 60)
    return {
        "version": COURSE_SCHEMA_VERSION,
        "name": "transfer",
        "points": [[float(c) for c in p] for p in pts],
        "wire_radius": 0.002,
        "start_s": 0.05,
        "end_s": None,
    }


_BUILTINS = {"training": _builtin_training, "transfer": _builtin_transfer}


def builtin_course_names() -> list[str]:
    return sorted(_BUILTINS)


def load_course(descriptor) -> WireCourse:
    """Build a WireCourse from a descriptor.

    `descriptor` may be a built-in course id ("training", "transfer"), a
    YAML document string, or an already-parsed mapping.  Required fields:
    version, name, points, wire_radius, start_s, end_s.
    """
    if isinstance(descriptor, str) and descriptor in _BUILTINS:
        doc = _BUILTINS[descriptor]()
    elif isinstance(descriptor, str):
        try:
            doc = yaml.safe_load(io.StringIO(descriptor))
        except yaml.YAMLError as exc:
            raise CourseFormatError(f"descriptor: invalid YAML ({exc})") from exc
    elif isinstance(descriptor, dict):
        doc = dict(descriptor)
    else:
        raise CourseFormatError("descriptor: expected mapping, YAML text, or id")
    if not isinstance(doc, dict):
        raise CourseFormatError("descriptor: expected a mapping document")

    for key in ("version", "name", "points", "wire_radius", "start_s"):
        if key not in doc or doc[key] is None:
            raise CourseFormatError(f"{key}: missing")
    if int(doc["version"]) != COURSE_SCHEMA_VERSION:
        raise CourseFormatError(
            f"version: unsupported ({doc['version']}, want {COURSE_SCHEMA_VERSION})")
    try:
        pts = np.asarray(doc["points"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise CourseFormatError("points: not numeric triples") from exc
    wire_radius = float(doc["wire_radius"])
    start_s = float(doc["start_s"])
    if doc.get("end_s") is None:
        seg = np.linalg.norm(np.diff(np.atleast_2d(pts), axis=0), axis=1)
        end_s = float(seg.sum()) - start_s
    else:
        end_s = float(doc["end_s"])
    return WireCourse(str(doc["name"]), pts, wire_radius, start_s, end_s)
