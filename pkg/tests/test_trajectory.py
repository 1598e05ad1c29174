import numpy as np
import pytest

from tlfabrik.geometry import Pose, rotate_about_axis
from tlfabrik.trajectory import Trajectory, TrajectoryError, make_trajectory


def test_arc_basic_geometry():
    traj = make_trajectory("arc", radius=0.2, length=0.4)
    assert traj.length == pytest.approx(0.4, abs=1e-6)
    assert np.allclose(traj.points[0], [0, 0, 0], atol=1e-15)
    assert np.allclose(traj.tangents[0], [0, 0, 1], atol=1e-15)
    # every point sits on the generating circle of radius 0.2
    center = np.array([0.2, 0.0, 0.0])
    d = np.linalg.norm(traj.points - center, axis=1)
    assert np.max(np.abs(d - 0.2)) < 1e-12


def test_arc_curvature():
    traj = make_trajectory("arc", radius=0.2, length=0.4, step=0.0005)
    # turn rate of the tangent equals 1/r
    i = len(traj.points) // 2
    dt = traj.tangents[i + 1] - traj.tangents[i - 1]
    ds = traj.arclength[i + 1] - traj.arclength[i - 1]
    assert np.linalg.norm(dt) / ds == pytest.approx(1 / 0.2, rel=1e-4)


def test_infinity_origin_and_tangent():
    traj = make_trajectory("infinity")
    assert np.allclose(traj.points[0], [0, 0, 0], atol=1e-15)
    # at t=0 the planar velocity is (amp_x, 2*amp_y), folded about the center axis
    v = np.array([0.2 * np.cos(np.pi / 6), 0.2, 0.0])
    assert np.max(np.abs(traj.tangents[0] - v / np.linalg.norm(v))) < 1e-12


def test_s_curve_tangential_junction():
    traj = make_trajectory("s_curve", radius=0.106, length=0.250)
    assert traj.length == pytest.approx(0.250, abs=1e-6)
    assert np.max(np.abs(traj.points[:, 1])) < 1e-15  # planar
    # stored analytic tangents are continuous through the junction: the kink
    # between consecutive tangents never exceeds the per-sample turn h/r
    turn = np.linalg.norm(np.diff(traj.tangents, axis=0), axis=1)
    assert np.max(turn) <= 0.001 / 0.106 * 1.01


def test_s_curve_junction_exact():
    from tlfabrik.trajectory import _arc_curve
    half, radius = 0.125, 0.106
    _, t1 = _arc_curve(radius, half, 0.001, sign=+1.0)
    _, t2 = _arc_curve(radius, half, 0.001, sign=-1.0,
                       start=np.zeros(3), start_tangent_angle=half / radius)
    assert np.max(np.abs(t1[-1] - t2[0])) < 1e-12


def test_point_and_tangent_interpolation():
    traj = make_trajectory("arc", radius=0.2, length=0.4)
    p = traj.point_at(0.2)
    assert np.linalg.norm(p - np.array([0.2, 0, 0])) == pytest.approx(0.2, abs=1e-6)
    t = traj.tangent_at(0.2)
    assert np.linalg.norm(t) == pytest.approx(1.0, abs=1e-12)
    # clipping beyond the ends
    assert np.allclose(traj.point_at(-1.0), traj.points[0])
    assert np.allclose(traj.point_at(9.0), traj.points[-1])


def test_transformed_rigidly():
    traj = make_trajectory("arc", radius=0.2, length=0.3)
    pose = Pose(np.array([0.1, 0.2, 0.3]), rotate_about_axis(np.array([1.0, 1.0, 0.0]), 0.7))
    moved = traj.transformed(pose)
    assert np.allclose(moved.points[0], pose.position, atol=1e-15)
    assert np.max(np.abs(moved.tangents[0] - pose.z_axis)) < 1e-12
    assert moved.length == pytest.approx(traj.length, abs=1e-12)


def test_distance_to_polyline():
    pts = np.array([[0, 0, 0], [1, 0, 0]], dtype=float)
    tans = np.array([[1, 0, 0], [1, 0, 0]], dtype=float)
    traj = Trajectory(pts, tans)
    assert traj.distance_to([0.5, 0.2, 0.0]) == pytest.approx(0.2, abs=1e-12)
    assert traj.distance_to([2.0, 0.0, 0.0]) == pytest.approx(1.0, abs=1e-12)


def test_invalid_inputs():
    with pytest.raises(TrajectoryError):
        make_trajectory("spiral")
    with pytest.raises(TrajectoryError):
        make_trajectory("arc", radius=-0.1)
    with pytest.raises(TrajectoryError):
        make_trajectory("arc", step=0.0)
    with pytest.raises(TrajectoryError):
        Trajectory(np.zeros((3, 3)), np.ones((3, 3)))  # non-unit tangents
