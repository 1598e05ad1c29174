"""Constant-curvature segment model.

Each segment is a circular arc of fixed length, parameterized by a bending
angle theta (central angle of the arc) and a bending-plane direction phi
measured in the segment's base frame. Segments are joined by short rigid
connector disks, and the whole arm sits on a base with an optional prismatic
extension along the base z-axis.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Pose, rot_y, rot_z

# Below this bending angle the arc transform switches to its straight-segment
# limit: tan(theta/2)/theta and (1-cos)/theta lose precision around 1e-7.
SMALL_THETA = 1e-7

TWO_PI = 2.0 * np.pi


class ArcError(ValueError):
    pass


def normalize_phi(phi: float) -> float:
    phi = float(phi) % TWO_PI
    return phi if phi >= 0.0 else phi + TWO_PI


@dataclass(frozen=True)
class SegmentArc:
    """One constant-curvature segment: bend theta [0, pi), direction phi [0, 2pi), arc length (m)."""
    theta: float
    phi: float
    length: float

    def __post_init__(self):
        if not (0.0 <= self.theta < np.pi):
            raise ArcError(f"theta must be in [0, pi), got {self.theta}")
        if self.length <= 0.0:
            raise ArcError(f"segment length must be positive, got {self.length}")
        object.__setattr__(self, "phi", 0.0 if self.theta == 0.0 else normalize_phi(self.phi))


@dataclass(frozen=True)
class ArmShape:
    """Whole-arm configuration: ordered segments plus base state.

    connector_length is the rigid disk segment appended after every arc
    segment (including the last, where the tool mounts). base_extension is
    the prismatic stroke of the floating base along its z-axis.
    """
    segments: tuple[SegmentArc, ...]
    connector_length: float = 0.01774
    base_extension: float = 0.0
    base_pose: Pose = field(default_factory=Pose.identity)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if len(self.segments) < 1:
            raise ArcError("arm needs at least one segment")
        if self.connector_length < 0.0:
            raise ArcError("connector_length must be >= 0")

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    @property
    def thetas(self) -> np.ndarray:
        return np.array([s.theta for s in self.segments])

    @property
    def phis(self) -> np.ndarray:
        return np.array([s.phi for s in self.segments])

    @property
    def lengths(self) -> np.ndarray:
        return np.array([s.length for s in self.segments])

    def with_angles(self, thetas, phis) -> "ArmShape":
        segs = tuple(SegmentArc(float(t), float(p), s.length)
                     for t, p, s in zip(thetas, phis, self.segments))
        return replace(self, segments=segs)


@dataclass(frozen=True)
class DiscAngles:
    """Per-disc gimbal angles of one segment, about the two disc axes."""
    alpha: tuple[float, ...]
    beta: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        if len(self.alpha) == 0 or len(self.alpha) != len(self.beta):
            raise ArcError("disc angle lists must be non-empty and equal length")


def disc_to_segment(discs: DiscAngles) -> tuple[float, float]:
    """Aggregate per-disc gimbal angles into the segment's (theta, phi).

    theta is the Euclidean norm of the two axis-angle sums, phi their
    atan2 azimuth normalized to [0, 2pi); a flat segment has phi = 0.
    """
    sa = float(np.sum(discs.alpha))
    sb = float(np.sum(discs.beta))
    theta = float(np.hypot(sb, sa))
    if theta >= np.pi:
        raise ArcError(f"aggregated bending angle {theta} out of range [0, pi)")
    if theta == 0.0:
        return 0.0, 0.0
    return theta, normalize_phi(np.arctan2(sb, sa))


def segment_rotation(theta: float, phi: float) -> np.ndarray:
    """Tip frame of an arc segment relative to its base frame."""
    return rot_z(phi) @ rot_y(theta) @ rot_z(-phi)


def segment_translation(theta: float, phi: float, length: float) -> np.ndarray:
    """Tip position of an arc segment relative to its base frame."""
    if theta < SMALL_THETA:
        # second-order limit of (L/theta)*(1-cos, ..., sin)
        return np.array([np.cos(phi) * length * theta / 2.0,
                         np.sin(phi) * length * theta / 2.0,
                         length * (1.0 - theta * theta / 6.0)])
    k = length / theta
    return np.array([k * np.cos(phi) * (1.0 - np.cos(theta)),
                     k * np.sin(phi) * (1.0 - np.cos(theta)),
                     k * np.sin(theta)])


def segment_transform(seg: SegmentArc) -> Pose:
    """Pose of the segment tip expressed in the segment base frame."""
    return Pose(segment_translation(seg.theta, seg.phi, seg.length),
                segment_rotation(seg.theta, seg.phi))


def forward_kinematics(shape: ArmShape) -> Pose:
    """World pose of the arm tip (after the last connector disk)."""
    p = shape.base_pose.position + shape.base_pose.rotation[:, 2] * shape.base_extension
    r = shape.base_pose.rotation.copy()
    c = shape.connector_length
    for seg in shape.segments:
        p = p + r @ segment_translation(seg.theta, seg.phi, seg.length)
        r = r @ segment_rotation(seg.theta, seg.phi)
        p = p + r[:, 2] * c
    return Pose(p, r)


def segment_boundaries(shape: ArmShape) -> list[Pose]:
    """Poses at the base of segment 1 and after each segment's connector."""
    p = shape.base_pose.position + shape.base_pose.rotation[:, 2] * shape.base_extension
    r = shape.base_pose.rotation.copy()
    out = [Pose(p, r)]
    c = shape.connector_length
    for seg in shape.segments:
        p = p + r @ segment_translation(seg.theta, seg.phi, seg.length)
        r = r @ segment_rotation(seg.theta, seg.phi)
        p = p + r[:, 2] * c
        out.append(Pose(p, r))
    return out


def centerline(shape: ArmShape, resolution: float = 0.002):
    """Sample the arm centerline (arcs plus connector disks) at roughly
    `resolution` spacing, starting at the first segment's base.

    Returns (points, tangents); tangents are the local backbone direction.
    """
    p = shape.base_pose.position + shape.base_pose.rotation[:, 2] * shape.base_extension
    r = shape.base_pose.rotation.copy()
    pts = [p.copy()]
    tans = [r[:, 2].copy()]
    c = shape.connector_length
    for seg in shape.segments:
        n = max(2, int(np.ceil(seg.length / resolution)) + 1)
        kappa = seg.theta / seg.length
        cp, sp = np.cos(seg.phi), np.sin(seg.phi)
        for s in np.linspace(0.0, seg.length, n)[1:]:
            pts.append(p + r @ segment_translation(seg.theta * s / seg.length, seg.phi, s))
            tans.append(r @ np.array([cp * np.sin(kappa * s), sp * np.sin(kappa * s),
                                      np.cos(kappa * s)]))
        r = r @ segment_rotation(seg.theta, seg.phi)
        p = pts[-1]
        if c > 0.0:
            nc = max(2, int(np.ceil(c / resolution)) + 1)
            for s in np.linspace(0.0, c, nc)[1:]:
                pts.append(p + r[:, 2] * s)
                tans.append(r[:, 2].copy())
            p = pts[-1]
    return np.array(pts), np.array(tans)


def centerline_points(shape: ArmShape, resolution: float = 0.002) -> np.ndarray:
    return centerline(shape, resolution)[0]


@dataclass(frozen=True)
class TendonDeltas:
    """Signed length changes (m) of the three drive tendons per segment."""
    delta: np.ndarray  # (n_segments, 3)

    def __post_init__(self):
        object.__setattr__(self, "delta", np.asarray(self.delta, dtype=float))


# Angular spacing between adjacent segments' tendon holes on the disks: nine
# holes, 40 degrees apart; one segment's three tendons sit 120 degrees apart.
HOLE_OFFSET = 40.0 * np.pi / 180.0


def tendon_deltas(shape: ArmShape, hole_radius: float = 0.0075) -> TendonDeltas:
    """Tendon length changes from the flat state.

    Tendon m of segment j runs through every disk of segments 1..j, so its
    length change accumulates the bending of all proximal segments:
        delta[j, m] = sum_{jj<=j} r * theta_jj * cos(phi_jj + HOLE_OFFSET*(j-1) + 2pi*m/3)
    """
    if hole_radius <= 0.0:
        raise ArcError("hole_radius must be positive")
    n = shape.n_segments
    thetas, phis = shape.thetas, shape.phis
    delta = np.zeros((n, 3))
    for j in range(n):
        for m in range(3):
            off = HOLE_OFFSET * j + TWO_PI * m / 3.0
            delta[j, m] = hole_radius * float(np.sum(thetas[:j + 1] * np.cos(phis[:j + 1] + off)))
    return TendonDeltas(delta)


def stroke_feasible(deltas: TendonDeltas, stroke_limit: float = 0.030) -> bool:
    """True iff every tendon length change fits the drive-screw stroke."""
    return bool(np.all(np.abs(deltas.delta) <= stroke_limit))
