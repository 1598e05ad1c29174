"""3D rotation and pose primitives shared by every other module."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GeometryError(ValueError):
    """Raised for degenerate geometric inputs (e.g. zero-length axis)."""


def unit(v: np.ndarray) -> np.ndarray:
    """Normalize a 3-vector; raises GeometryError below 1e-12 norm."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n < 1e-12:
        raise GeometryError("cannot normalize near-zero vector")
    return v / n


def rotate_about_axis(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix for a rotation of `angle` radians about `axis`.

    The axis is normalized here; |axis| < 1e-12 is an error.
    """
    a = unit(axis)
    k = np.array([[0.0, -a[2], a[1]],
                  [a[2], 0.0, -a[0]],
                  [-a[1], a[0], 0.0]])
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_angle(r: np.ndarray) -> float:
    """Angle of a rotation matrix (radians, in [0, pi])."""
    c = (np.trace(r) - 1.0) / 2.0
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def quat_from_matrix(r: np.ndarray) -> np.ndarray:
    """Unit quaternion [w, x, y, z] from a rotation matrix (Shepperd's method)."""
    tr = r[0, 0] + r[1, 1] + r[2, 2]
    if tr > 0:
        s = np.sqrt(tr + 1.0) * 2.0
        return np.array([0.25 * s,
                         (r[2, 1] - r[1, 2]) / s,
                         (r[0, 2] - r[2, 0]) / s,
                         (r[1, 0] - r[0, 1]) / s])
    i = int(np.argmax([r[0, 0], r[1, 1], r[2, 2]]))
    if i == 0:
        s = np.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2]) * 2.0
        return np.array([(r[2, 1] - r[1, 2]) / s, 0.25 * s,
                         (r[0, 1] + r[1, 0]) / s, (r[0, 2] + r[2, 0]) / s])
    if i == 1:
        s = np.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2]) * 2.0
        return np.array([(r[0, 2] - r[2, 0]) / s, (r[0, 1] + r[1, 0]) / s,
                         0.25 * s, (r[1, 2] + r[2, 1]) / s])
    s = np.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1]) * 2.0
    return np.array([(r[1, 0] - r[0, 1]) / s, (r[0, 2] + r[2, 0]) / s,
                     (r[1, 2] + r[2, 1]) / s, 0.25 * s])


def twist_about_axis(r: np.ndarray, axis: np.ndarray) -> float:
    """Signed twist component (radians) of rotation `r` about the unit `axis`.

    Swing-twist split: the returned angle t is the one whose rotation about
    `axis` best accounts for `r`; well defined even when r is not a pure
    rotation about the axis.
    """
    q = quat_from_matrix(r)
    qa = q[1] * axis[0] + q[2] * axis[1] + q[3] * axis[2]
    t = 2.0 * float(np.arctan2(qa, q[0]))
    return float((t + np.pi) % (2.0 * np.pi) - np.pi)  # principal value


@dataclass(frozen=True)
class Pose:
    """Rigid pose: position (m) plus an orthonormal, right-handed frame."""
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float).reshape(3, 3))

    @property
    def x_axis(self) -> np.ndarray:
        return self.rotation[:, 0]

    @property
    def y_axis(self) -> np.ndarray:
        return self.rotation[:, 1]

    @property
    def z_axis(self) -> np.ndarray:
        return self.rotation[:, 2]

    def compose(self, other: "Pose") -> "Pose":
        """Chain rigid transforms: other expressed in this pose's frame."""
        return Pose(self.position + self.rotation @ other.position,
                    self.rotation @ other.rotation)

    def transform_point(self, p: np.ndarray) -> np.ndarray:
        return self.position + self.rotation @ np.asarray(p, dtype=float)

    @staticmethod
    def identity() -> "Pose":
        return Pose()

    def validate(self, tol: float = 1e-10) -> None:
        r = self.rotation
        if np.max(np.abs(r.T @ r - np.eye(3))) > tol:
            raise GeometryError("rotation matrix is not orthonormal")
        if abs(np.linalg.det(r) - 1.0) > tol:
            raise GeometryError("rotation matrix determinant is not +1")


def frame_from_z(z: np.ndarray, x_hint: np.ndarray | None = None) -> np.ndarray:
    """Right-handed frame whose third column is `z`.

    The x column is the projection of `x_hint` (default world x, falling back
    to world y when nearly parallel to z) onto the plane normal to z.
    """
    z = unit(z)
    hint = np.array([1.0, 0.0, 0.0]) if x_hint is None else np.asarray(x_hint, dtype=float)
    x = hint - np.dot(hint, z) * z
    if np.linalg.norm(x) < 1e-8:
        hint = np.array([0.0, 1.0, 0.0])
        x = hint - np.dot(hint, z) * z
    x = unit(x)
    y = np.cross(z, x)
    return np.column_stack([x, y, z])


def pose_error(current: Pose, target: Pose) -> tuple[float, float]:
    """(position error in m, orientation error in radians).

    The orientation error is the angle of the full relative rotation
    current.rotation^T @ target.rotation, not just the z-axis misalignment.
    """
    pos_err = float(np.linalg.norm(current.position - target.position))
    rot_err = rotation_angle(current.rotation.T @ target.rotation)
    return pos_err, rot_err
