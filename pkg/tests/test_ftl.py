import numpy as np
import pytest

from tlfabrik.arc import forward_kinematics
from tlfabrik.constraints import Scene, SphereObstacle
from tlfabrik.fileio import default_robot
from tlfabrik.ftl import FtlError, extend_from_tip, ftl_plan
from tlfabrik.solver import SolverConfig
from tlfabrik.trajectory import Trajectory, make_trajectory


def demo_shape():
    return default_robot(4).template_shape().with_angles(
        [0.29, 0.77, 0.70, 1.01], [2.75, 0.40, 4.81, 4.99])


def straight_line_extension(shape, length=0.1):
    tip = forward_kinematics(shape)
    s = np.linspace(0.0, length, 51)
    pts = tip.position + np.outer(s, tip.z_axis)
    tans = np.tile(tip.z_axis, (51, 1))
    return Trajectory(pts, tans, kind="line")


def test_zero_length_extension_is_identity():
    shape = demo_shape()
    ext = straight_line_extension(shape, 0.004)  # shorter than one step
    report = ftl_plan(shape, ext, Scene(base_mode="free-floating"), step=0.005)
    assert len(report.increments) == 0
    assert report.final_shape is shape


def test_straight_arm_straight_line_degenerate():
    # a straight arm sliding along its own axis is pure base translation
    shape = default_robot(3).template_shape()
    ext = straight_line_extension(shape, 0.05)
    report = ftl_plan(shape, ext, Scene(base_mode="free-floating"), step=0.01)
    assert len(report.increments) == 5
    assert all(inc.converged for inc in report.increments)
    assert report.max_deviation <= 1e-6
    for inc in report.increments:
        assert np.max(inc.shape.thetas) < 1e-6


def test_extension_must_start_at_tip():
    shape = demo_shape()
    bad = make_trajectory("arc", radius=0.2, length=0.1)  # still at the origin
    with pytest.raises(FtlError):
        ftl_plan(shape, bad, Scene())


def test_arc_scenario_tracks_with_small_deviation():
    # coarse-step version of the demonstration scenario
    shape = demo_shape()
    ext = extend_from_tip(shape, make_trajectory("arc", radius=0.2, length=0.4))
    report = ftl_plan(shape, ext, Scene(base_mode="free-floating"), step=0.02)
    assert len(report.increments) == 20
    assert report.mean_deviation <= 0.010
    assert report.max_deviation <= 0.030
    assert np.all(report.profile[:, 1] >= 0.0)


def test_arc_lengths_conserved_every_increment():
    shape = demo_shape()
    ext = extend_from_tip(shape, make_trajectory("arc", radius=0.2, length=0.2))
    report = ftl_plan(shape, ext, Scene(base_mode="free-floating"), step=0.02)
    for inc in report.increments:
        assert np.allclose(inc.shape.lengths, shape.lengths, atol=1e-15)


def test_prismatic_base_mode_runs():
    shape = default_robot(3).template_shape().with_angles([0.2, 0.3, 0.1], [0, 1, 2])
    ext = extend_from_tip(shape, make_trajectory("arc", radius=0.3, length=0.08))
    report = ftl_plan(shape, ext, Scene(base_mode="prismatic-z", extension_limit=0.1),
                      step=0.02)
    assert len(report.increments) == 4
    # base stays on the mount axis in this mode
    for inc in report.increments:
        assert np.allclose(inc.shape.base_pose.position, shape.base_pose.position,
                           atol=1e-12)
        assert abs(inc.shape.base_extension) <= 0.1 + 1e-12


def test_obstacle_scene_still_tracks():
    shape = demo_shape()
    tip = forward_kinematics(shape)
    # obstacle standing off to the side of the extension path
    ob = SphereObstacle(tip.position + np.array([0.15, 0.15, 0.0]), 0.04)
    ext = extend_from_tip(shape, make_trajectory("arc", radius=0.2, length=0.1))
    report = ftl_plan(shape, ext, Scene(obstacles=(ob,), base_mode="free-floating"),
                      step=0.02, cfg=SolverConfig(rng_seed=4))
    assert len(report.increments) == 5
    assert report.mean_deviation <= 0.015


def test_profile_columns():
    shape = demo_shape()
    ext = extend_from_tip(shape, make_trajectory("arc", radius=0.2, length=0.04))
    report = ftl_plan(shape, ext, Scene(base_mode="free-floating"), step=0.02)
    assert report.profile.shape[1] == 2
    # arc positions run from the base toward the tool along the arm
    assert report.profile[0, 0] == 0.0
    assert np.max(report.profile[:, 0]) <= sum(shape.lengths) + 4 * shape.connector_length + 1e-6
