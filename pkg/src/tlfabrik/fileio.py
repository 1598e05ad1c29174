"""Versioned JSON descriptions: robots, scenes, solver configs."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields

import numpy as np

from .arc import ArmShape, SegmentArc
from .constraints import Scene, SphereObstacle
from .geometry import Pose
from .solver import ConfigError, SolverConfig

SCHEMA_VERSION = 1


class FileFormatError(ValueError):
    pass


@dataclass(frozen=True)
class RobotModel:
    """Physical description of one arm build."""
    name: str = "three-segment-tendon"
    segment_lengths: tuple[float, ...] = (0.102, 0.102, 0.102)
    connector_length: float = 0.01774
    hole_radius: float = 0.0075
    stroke_limit: float = 0.030
    theta_max: tuple[float, ...] = (float(0.89 * np.pi),) * 3
    base_mode: str = "prismatic-z"
    extension_limit: float = 0.100

    def __post_init__(self):
        object.__setattr__(self, "segment_lengths", tuple(float(l) for l in self.segment_lengths))
        tm = self.theta_max
        if np.isscalar(tm):
            tm = (float(tm),) * len(self.segment_lengths)
        object.__setattr__(self, "theta_max", tuple(float(t) for t in tm))
        if len(self.theta_max) != len(self.segment_lengths):
            raise FileFormatError("theta_max must match segment count")

    @property
    def n_segments(self) -> int:
        return len(self.segment_lengths)

    def template_shape(self, base_pose: Pose | None = None) -> ArmShape:
        """Straight configuration of this robot."""
        segs = tuple(SegmentArc(0.0, 0.0, l) for l in self.segment_lengths)
        return ArmShape(segs, self.connector_length, 0.0, base_pose or Pose.identity())


def default_robot(n_segments: int = 3, segment_length: float = 0.102) -> RobotModel:
    return RobotModel(name=f"{n_segments}-segment-tendon",
                      segment_lengths=(segment_length,) * n_segments,
                      theta_max=(float(0.89 * np.pi),) * n_segments)


def _check_schema(data: dict, what: str) -> None:
    if data.get("schema_version") != SCHEMA_VERSION:
        raise FileFormatError(
            f"{what}: expected schema_version {SCHEMA_VERSION}, got {data.get('schema_version')!r}")


def robot_to_dict(robot: RobotModel) -> dict:
    return {"schema_version": SCHEMA_VERSION,
            "name": robot.name,
            "segment_lengths": list(robot.segment_lengths),
            "connector_length": robot.connector_length,
            "hole_radius": robot.hole_radius,
            "stroke_limit": robot.stroke_limit,
            "theta_max": list(robot.theta_max),
            "base_mode": robot.base_mode,
            "extension_limit": robot.extension_limit}


def robot_from_dict(data: dict) -> RobotModel:
    _check_schema(data, "robot description")
    kwargs = {k: v for k, v in data.items() if k != "schema_version"}
    known = {f.name for f in fields(RobotModel)}
    unknown = set(kwargs) - known
    if unknown:
        raise FileFormatError(f"robot description: unknown fields {sorted(unknown)}")
    kwargs["segment_lengths"] = tuple(kwargs.get("segment_lengths", (0.102,) * 3))
    if "theta_max" in kwargs and isinstance(kwargs["theta_max"], list):
        kwargs["theta_max"] = tuple(kwargs["theta_max"])
    return RobotModel(**kwargs)


def load_robot(path) -> RobotModel:
    with open(path) as fh:
        return robot_from_dict(json.load(fh))


def save_robot(robot: RobotModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(robot_to_dict(robot), fh, indent=2)


def scene_from_dict(data: dict) -> tuple[Scene, dict | None]:
    """Scene plus the optional embedded trajectory spec {kind, params...}."""
    _check_schema(data, "scene")
    obstacles = tuple(SphereObstacle(np.array(ob["center"], dtype=float), float(ob["radius"]))
                      for ob in data.get("obstacles", []))
    scene = Scene(obstacles=obstacles,
                  theta_max=float(data.get("theta_max", 0.89 * np.pi)),
                  arm_radius=float(data.get("arm_radius", 0.0095)),
                  base_mode=data.get("base_mode", "free-floating"),
                  extension_limit=float(data.get("extension_limit", 0.100)))
    return scene, data.get("trajectory")


def load_scene(path) -> tuple[Scene, dict | None]:
    with open(path) as fh:
        return scene_from_dict(json.load(fh))


def scene_to_dict(scene: Scene, trajectory: dict | None = None) -> dict:
    data = {"schema_version": SCHEMA_VERSION,
            "obstacles": [{"center": list(ob.center), "radius": ob.radius}
                          for ob in scene.obstacles],
            "theta_max": scene.theta_max,
            "arm_radius": scene.arm_radius,
            "base_mode": scene.base_mode,
            "extension_limit": scene.extension_limit}
    if trajectory is not None:
        data["trajectory"] = trajectory
    return data


def config_from_dict(data: dict) -> SolverConfig:
    _check_schema(data, "solver config")
    kwargs = {k: v for k, v in data.items() if k != "schema_version"}
    known = {f.name for f in fields(SolverConfig)}
    unknown = set(kwargs) - known
    if unknown:
        raise ConfigError(f"solver config: unknown fields {sorted(unknown)}")
    if "p_wm" in kwargs:
        kwargs["p_wm"] = tuple(kwargs["p_wm"])
    cfg = SolverConfig(**kwargs)
    cfg.validate()
    return cfg


def load_config(path) -> SolverConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))


def config_to_dict(cfg: SolverConfig) -> dict:
    out = {"schema_version": SCHEMA_VERSION}
    for f in fields(SolverConfig):
        v = getattr(cfg, f.name)
        out[f.name] = list(v) if isinstance(v, tuple) else v
    return out


def pose_to_dict(pose: Pose) -> dict:
    return {"position": [float(x) for x in pose.position],
            "rotation": [[float(x) for x in row] for row in pose.rotation]}


def pose_from_dict(data: dict) -> Pose:
    pose = Pose(np.array(data["position"], dtype=float),
                np.array(data.get("rotation", np.eye(3).tolist()), dtype=float))
    pose.validate(tol=1e-8)
    return pose


def shape_to_dict(shape: ArmShape) -> dict:
    return {"thetas": [s.theta for s in shape.segments],
            "phis": [s.phi for s in shape.segments],
            "lengths": [s.length for s in shape.segments],
            "connector_length": shape.connector_length,
            "base_extension": shape.base_extension,
            "base_pose": pose_to_dict(shape.base_pose)}


def shape_from_dict(data: dict) -> ArmShape:
    segs = tuple(SegmentArc(float(t), float(p), float(l))
                 for t, p, l in zip(data["thetas"], data["phis"], data["lengths"]))
    return ArmShape(segs, float(data.get("connector_length", 0.01774)),
                    float(data.get("base_extension", 0.0)),
                    pose_from_dict(data.get("base_pose", {"position": [0, 0, 0]})))
