"""Inverse kinematics and follow-the-leader planning for multi-segment
constant-curvature continuum arms with a floating base."""

from .arc import (ArmShape, DiscAngles, SegmentArc, TendonDeltas, disc_to_segment,
                  forward_kinematics, segment_transform, stroke_feasible, tendon_deltas)
from .chain import LinkChain, arc_to_link, link_to_arc
from .constraints import Scene, SphereObstacle, adcek, cone_candidate, sphere_candidates, update_virtual_joint
from .fabrik import backward_reach, forward_reach, update_segment
from .fileio import RobotModel, default_robot
from .ftl import FtlReport, extend_from_tip, ftl_plan
from .geometry import Pose, pose_error, rotate_about_axis
from .solver import SolveReport, SolverConfig, apply_workmode, convergence_judge, randomize_shape, solve
from .trajectory import Trajectory, make_trajectory
from .workspace import WorkspaceCell, sample_workspace

__all__ = [
    "ArmShape", "DiscAngles", "SegmentArc", "TendonDeltas", "disc_to_segment",
    "forward_kinematics", "segment_transform", "stroke_feasible", "tendon_deltas",
    "LinkChain", "arc_to_link", "link_to_arc",
    "Scene", "SphereObstacle", "adcek", "cone_candidate", "sphere_candidates",
    "update_virtual_joint",
    "backward_reach", "forward_reach", "update_segment",
    "RobotModel", "default_robot",
    "FtlReport", "extend_from_tip", "ftl_plan",
    "Pose", "pose_error", "rotate_about_axis",
    "SolveReport", "SolverConfig", "apply_workmode", "convergence_judge",
    "randomize_shape", "solve",
    "Trajectory", "make_trajectory",
    "WorkspaceCell", "sample_workspace",
]

__version__ = "0.1.0"
