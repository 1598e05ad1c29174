"""Shared oracles and generators for the test suite.

The oracles here deliberately avoid the library's own code paths: rotations
are built from quaternion composition, and forward kinematics is recovered
by numerically integrating the backbone tangent field.
"""
import numpy as np
import pytest

from tlfabrik.arc import ArmShape, SegmentArc
from tlfabrik.geometry import Pose


# ---------------------------------------------------------------- rotations
def quat_mul(q1, q2):
    w1, x1, y1, z1 = q1
    w2, x2, y2, z2 = q2
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])


def quat_from_axis_angle(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    half = angle / 2.0
    return np.concatenate([[np.cos(half)], np.sin(half) * axis])


def quat_rotate(q, v):
    qv = np.concatenate([[0.0], v])
    w, x, y, z = quat_mul(quat_mul(q, qv), q * [1, -1, -1, -1])
    return np.array([x, y, z])


def rotmat_from_quat(q):
    return np.column_stack([quat_rotate(q, e) for e in np.eye(3)])


# ------------------------------------------------- arc-integration oracle
def integrate_segment(theta, phi, length, n=10001):
    """Tip pose of one constant-curvature segment by integrating the tangent
    field t(s) and the angular-rate equation, independent of the closed form."""
    from scipy.integrate import simpson
    from scipy.linalg import expm

    s = np.linspace(0.0, length, n)
    if theta < 1e-12:
        return np.array([0.0, 0.0, length]), np.eye(3)
    kappa = theta / length
    tangent = np.stack([np.cos(phi) * np.sin(kappa * s),
                        np.sin(phi) * np.sin(kappa * s),
                        np.cos(kappa * s)], axis=1)
    pos = np.array([simpson(tangent[:, i], x=s) for i in range(3)])
    # frame rotates at rate kappa about the fixed bending-plane normal
    axis = np.array([-np.sin(phi), np.cos(phi), 0.0])
    k = np.array([[0.0, -axis[2], axis[1]],
                  [axis[2], 0.0, -axis[0]],
                  [-axis[1], axis[0], 0.0]])
    rot = expm(k * theta)
    return pos, rot


def integrate_arm(shape: ArmShape, n=10001):
    """World tip pose of the whole arm via per-segment integration."""
    p = shape.base_pose.position + shape.base_pose.rotation[:, 2] * shape.base_extension
    r = shape.base_pose.rotation.copy()
    for seg in shape.segments:
        dp, dr = integrate_segment(seg.theta, seg.phi, seg.length, n)
        p = p + r @ dp
        r = r @ dr
        p = p + r[:, 2] * shape.connector_length
    return Pose(p, r)


# ------------------------------------------------------------- generators
def random_shape(rng, n_segments=3, theta_max=0.9 * np.pi, length=0.102,
                 connector=0.01774, theta_min=0.0):
    segs = tuple(SegmentArc(rng.uniform(theta_min, theta_max),
                            rng.uniform(0.0, 2.0 * np.pi), length)
                 for _ in range(n_segments))
    return ArmShape(segs, connector)


def random_rotation(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    return rotmat_from_quat(q)


def random_pose(rng, scale=0.5):
    return Pose(rng.uniform(-scale, scale, 3), random_rotation(rng))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
