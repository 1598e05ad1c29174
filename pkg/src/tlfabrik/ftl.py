"""Follow-the-leader planning with a floating base.

The tracked path is the initial arm centerline continued by an extension
trajectory appended tangentially at the tool. Each planning increment slides
the arm's window along that path by one step: the tool is anchored at the
window's far end, the base is released to the window's near end (subject to
the scene's base mobility), the chain is seeded from the path window itself
and relaxed with reaching pairs until the tool converges. Obstacle and
joint-limit handling plugs into the sweeps through the candidate-joint
update.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arc import ArmShape, centerline, forward_kinematics
from .chain import LinkChain
from .constraints import Scene, update_virtual_joint
from .fabrik import _bend_update, backward_reach, forward_reach
from .geometry import Pose, frame_from_z
from .solver import SolverConfig, _shape_from_chain
from .trajectory import Trajectory


class FtlError(ValueError):
    pass


@dataclass
class FtlIncrement:
    shape: ArmShape
    converged: bool
    iterations: int
    tip_error: float          # m, tool point vs path point at the window end
    base_arclength: float     # window start along the full path (m)


@dataclass
class FtlReport:
    increments: list[FtlIncrement]
    profile: np.ndarray       # rows: (arc position along the arm, deviation), m
    path: Trajectory
    initial: ArmShape

    @property
    def final_shape(self) -> ArmShape:
        return self.increments[-1].shape if self.increments else self.initial

    @property
    def mean_deviation(self) -> float:
        return float(np.mean(self.profile[:, 1])) if len(self.profile) else 0.0

    @property
    def max_deviation(self) -> float:
        return float(np.max(self.profile[:, 1])) if len(self.profile) else 0.0


def _seed_from_path(path: Trajectory, s0: float, seg_lengths, connector: float,
                    base_pose: Pose, base_extension: float) -> LinkChain:
    """Chain seed whose segments follow the path window starting at s0.

    Per-segment bending is fitted from the window's boundary tangents, which
    makes the seed coincide with the previous arm shape wherever the path
    does (the essence of follow-the-leader stepping).
    """
    n = len(seg_lengths)
    dirs = np.zeros((n + 1, 3))
    joints = np.zeros((n, 3))
    lens = np.zeros(n)
    s = s0
    dirs[0] = path.tangent_at(s)
    for j, seg_len in enumerate(seg_lengths):
        t_e = path.tangent_at(s + seg_len)
        theta, link_len, t_e = _bend_update(dirs[j], t_e, float(seg_len))
        joints[j] = path.point_at(s) + dirs[j] * link_len
        lens[j] = link_len
        dirs[j + 1] = t_e
        s += seg_len + connector
    return LinkChain(np.asarray(seg_lengths, dtype=float), connector, dirs, joints,
                     lens, base_pose, base_extension)


def _base_anchor(path: Trajectory, s_base: float, scene: Scene, mount: Pose) -> tuple[Pose, float]:
    """Base pose and prismatic extension for the current window start."""
    p = path.point_at(s_base)
    t = path.tangent_at(s_base)
    if scene.base_mode == "free-floating":
        return Pose(p, frame_from_z(t, mount.rotation[:, 0])), 0.0
    if scene.base_mode == "prismatic-z":
        z = mount.rotation[:, 2]
        ext = float(np.clip(np.dot(p - mount.position, z),
                            -scene.extension_limit, scene.extension_limit))
        return mount, ext
    return mount, 0.0  # fixed


def _constrained_pair(chain: LinkChain, tip_pose: Pose, scene: Scene,
                      rng: np.random.Generator) -> LinkChain:
    """One forward/backward pair with candidate-joint screening when the
    scene carries obstacles."""
    if not scene.obstacles:
        out = forward_reach(chain, tip_pose)
        return backward_reach(out, tip_dir=tip_pose.z_axis)
    out = chain.copy()
    n = out.n_segments
    node = tip_pose.position - tip_pose.z_axis * out.connector
    ndir = tip_pose.z_axis.copy()
    out.dirs[n] = ndir
    for j in range(n - 1, -1, -1):
        if j > 0:
            prov = node - ndir * out.link_lengths[j]
            ref, _ = update_virtual_joint(node, ndir, prov, out.joints[j - 1],
                                          float(out.seg_lengths[j]), scene.theta_max,
                                          scene, rng)
            diff = prov - ref
            norm = np.linalg.norm(diff)
            raw = ndir if norm < 1e-12 else diff / norm
        else:
            raw = out.base_dir
        theta, link_len, new_dir = _bend_update(ndir, raw, float(out.seg_lengths[j]))
        if j == 0:
            new_dir = out.base_dir
        out.joints[j] = node - ndir * link_len
        out.link_lengths[j] = link_len
        out.dirs[j] = new_dir
        if j > 0:
            node = out.joints[j] - new_dir * (link_len + out.connector)
            ndir = new_dir
    # backward side: the mirrored screening reuses the tip-anchored check by
    # reversing the traversal sense of each reconstructed segment
    node = out.base_node.copy()
    ndir = out.base_dir.copy()
    out.dirs[0] = ndir
    for j in range(n):
        if j < n - 1:
            prov = node + ndir * out.link_lengths[j]
            ref, _ = update_virtual_joint(node, -ndir, prov, out.joints[j + 1],
                                          float(out.seg_lengths[j]), scene.theta_max,
                                          scene, rng)
            diff = ref - prov
            norm = np.linalg.norm(diff)
            raw = ndir if norm < 1e-12 else diff / norm
            theta, link_len, new_dir = _bend_update(ndir, raw, float(out.seg_lengths[j]))
        else:
            _, link_len, _ = _bend_update(ndir, tip_pose.z_axis, float(out.seg_lengths[j]))
            new_dir = tip_pose.z_axis.copy()
        out.joints[j] = node + ndir * link_len
        out.link_lengths[j] = link_len
        out.dirs[j + 1] = new_dir
        node = out.joints[j] + new_dir * (link_len + out.connector)
        ndir = new_dir
    return out


def ftl_plan(initial: ArmShape, extension: Trajectory, scene: Scene | None = None,
             cfg: SolverConfig | None = None, step: float = 0.005,
             max_pair_iterations: int = 100, profile_resolution: float = 0.005) -> FtlReport:
    """Advance the arm along its own centerline extended by `extension`.

    The extension must start at the current tool position, tangent to the
    tool z-axis (build it with `extend_from_tip`). Increments that fail to
    converge are recorded and planning continues from the last feasible
    configuration. The deviation profile samples every increment's arm
    centerline against the full tracked path.
    """
    scene = scene or Scene()
    cfg = cfg or SolverConfig()
    if step <= 0.0:
        raise FtlError("step must be positive")
    rng = np.random.default_rng(cfg.rng_seed)

    arm_pts, arm_tans = centerline(initial, profile_resolution)
    tip = forward_kinematics(initial)
    if np.linalg.norm(extension.points[0] - tip.position) > 1e-3:
        raise FtlError("extension trajectory must start at the current tool position")
    path_pts = np.vstack([arm_pts, extension.points[1:]])
    path_tans = np.vstack([arm_tans, extension.tangents[1:]])
    path = Trajectory(path_pts, path_tans, kind="ftl-path")

    arm_len = float(np.sum(np.linalg.norm(np.diff(arm_pts, axis=0), axis=1)))
    seg_lengths = initial.lengths
    mount = initial.base_pose

    increments: list[FtlIncrement] = []
    profile_rows: list[np.ndarray] = []
    # milli-step slack: the sampled extension polyline is a hair shorter than
    # the analytic curve, which must not drop the final increment
    n_inc = int(np.floor(extension.length / step + 1e-3))
    shape = initial
    for k in range(1, n_inc + 1):
        s_base = k * step
        s_tip = arm_len + k * step
        tip_pose = Pose(path.point_at(s_tip), frame_from_z(path.tangent_at(s_tip)))
        base_pose, base_ext = _base_anchor(path, s_base, scene, mount)

        chain = _seed_from_path(path, s_base, seg_lengths, initial.connector_length,
                                base_pose, base_ext)
        converged = False
        iters = 0
        tip_err = float("inf")
        for _ in range(max_pair_iterations):
            chain = _constrained_pair(chain, tip_pose, scene, rng)
            iters += 1
            tip_err = float(np.linalg.norm(chain.tip_position() - tip_pose.position))
            if tip_err <= cfg.e_min:
                converged = True
                break
        new_shape = _shape_from_chain(chain)
        if converged:
            shape = new_shape
        increments.append(FtlIncrement(new_shape, converged, iters, tip_err, s_base))

        pts, _ = centerline(shape, profile_resolution)
        arc_pos = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
        devs = np.array([path.distance_to(q) for q in pts])
        profile_rows.append(np.column_stack([arc_pos, devs]))

    profile = np.vstack(profile_rows) if profile_rows else np.zeros((0, 2))
    return FtlReport(increments, profile, path, initial)


def extend_from_tip(shape: ArmShape, trajectory: Trajectory) -> Trajectory:
    """Anchor a locally-defined trajectory (origin, +z tangent) at the arm's
    current tool pose."""
    return trajectory.transformed(forward_kinematics(shape))
