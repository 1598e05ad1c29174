"""Virtual link model of the arm.

Every arc segment is replaced by two equal tangent line segments (virtual
links) meeting at a virtual joint, which turns the arm into a point chain
the reaching iterations can operate on. The chain stores, per segment j:
the junction directions d[j-1] (base tangent) and d[j] (tip tangent), the
virtual joint position, and the common virtual link length

    |vl_j| = (L_j / theta_j) * tan(theta_j / 2)   (-> L_j/2 as theta -> 0).

Node positions are derived: node_b = vj - d[j-1]*|vl|, node_e = vj + d[j]*|vl|.
Consecutive segments are joined by the rigid connector disk along the shared
junction direction, so the stretch between consecutive virtual joints is a
straight polyline.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arc import ArmShape, SegmentArc, SMALL_THETA, normalize_phi, segment_rotation
from .geometry import Pose


class ChainError(ValueError):
    pass


def virtual_link_length(theta: float, length: float) -> float:
    """(L/theta)*tan(theta/2) with a series fallback near theta = 0."""
    if theta < SMALL_THETA:
        return length / 2.0 * (1.0 + theta * theta / 12.0)
    return (length / theta) * np.tan(theta / 2.0)


@dataclass
class LinkChain:
    """Point-chain state of the arm plus its anchors.

    dirs[j] is the shared tangent at junction j: dirs[0] is the base tangent
    of segment 1, dirs[j] (j >= 1) is the tip tangent of segment j and the
    base tangent of segment j+1 across the rigid connector.
    """
    seg_lengths: np.ndarray          # (N,) arc lengths, conserved
    connector: float
    dirs: np.ndarray                 # (N+1, 3) unit junction tangents
    joints: np.ndarray               # (N, 3) virtual joint positions
    link_lengths: np.ndarray         # (N,) virtual link lengths
    base_pose: Pose                  # mount pose (anchor, never iterated)
    base_extension: float = 0.0

    def __post_init__(self):
        self.seg_lengths = np.asarray(self.seg_lengths, dtype=float)
        self.dirs = np.asarray(self.dirs, dtype=float)
        self.joints = np.asarray(self.joints, dtype=float)
        self.link_lengths = np.asarray(self.link_lengths, dtype=float)

    @property
    def n_segments(self) -> int:
        return len(self.seg_lengths)

    def copy(self) -> "LinkChain":
        return LinkChain(self.seg_lengths, self.connector, self.dirs.copy(),
                         self.joints.copy(), self.link_lengths.copy(),
                         self.base_pose, self.base_extension)

    # -- anchors ---------------------------------------------------------
    @property
    def base_dir(self) -> np.ndarray:
        """Prescribed tangent at the first segment's base (mount z-axis)."""
        return self.base_pose.rotation[:, 2]

    @property
    def base_node(self) -> np.ndarray:
        """Anchor position of the first segment's base."""
        return self.base_pose.position + self.base_dir * self.base_extension

    # -- derived nodes -----------------------------------------------------
    def node_b(self, j: int) -> np.ndarray:
        return self.joints[j] - self.dirs[j] * self.link_lengths[j]

    def node_e(self, j: int) -> np.ndarray:
        return self.joints[j] + self.dirs[j + 1] * self.link_lengths[j]

    def tip_node(self) -> np.ndarray:
        """End of the last arc segment (before its connector disk)."""
        return self.joints[-1] + self.dirs[-1] * self.link_lengths[-1]

    def tip_position(self) -> np.ndarray:
        """End-effector position: tip node plus the last connector disk."""
        return self.tip_node() + self.dirs[-1] * self.connector

    def polyline(self) -> np.ndarray:
        """Node/joint polyline from the mount to the end-effector."""
        pts = [self.base_pose.position, self.base_node]
        for j in range(self.n_segments):
            pts.append(self.node_b(j))
            pts.append(self.joints[j])
            pts.append(self.node_e(j))
        pts.append(self.tip_position())
        return np.array(pts)

    def consistency_residual(self) -> float:
        """Largest gap in the chain invariants (m or dimensionless).

        Checks unit tangents, the link-length/theta relation, and the rigid
        connector between consecutive segments.
        """
        res = float(np.max(np.abs(np.linalg.norm(self.dirs, axis=1) - 1.0)))
        for j in range(self.n_segments):
            cth = float(np.clip(np.dot(self.dirs[j], self.dirs[j + 1]), -1.0, 1.0))
            theta = float(np.arccos(cth))
            res = max(res, abs(self.link_lengths[j] - virtual_link_length(theta, self.seg_lengths[j])))
            if j + 1 < self.n_segments:
                gap = self.node_b(j + 1) - (self.node_e(j) + self.dirs[j + 1] * self.connector)
                res = max(res, float(np.max(np.abs(gap))))
        return res


def arc_to_link(shape: ArmShape) -> LinkChain:
    """Convert an arc configuration into its virtual link chain."""
    n = shape.n_segments
    dirs = np.zeros((n + 1, 3))
    joints = np.zeros((n, 3))
    lens = np.zeros(n)
    p = shape.base_pose.position + shape.base_pose.rotation[:, 2] * shape.base_extension
    r = shape.base_pose.rotation.copy()
    dirs[0] = r[:, 2]
    for j, seg in enumerate(shape.segments):
        lens[j] = virtual_link_length(seg.theta, seg.length)
        joints[j] = p + dirs[j] * lens[j]
        r = r @ segment_rotation(seg.theta, seg.phi)
        dirs[j + 1] = r[:, 2]
        p = joints[j] + dirs[j + 1] * (lens[j] + shape.connector_length)
    return LinkChain(shape.lengths, shape.connector_length, dirs, joints, lens,
                     shape.base_pose, shape.base_extension)


def chain_angles(chain: LinkChain, base_rotation: np.ndarray | None = None):
    """Recover per-segment (theta, phi) and the composed tip frame.

    phi_j is the azimuth of the tip tangent expressed in the segment's base
    frame, which is propagated from `base_rotation` (default: the chain's
    mount frame). Straight segments get phi = 0.
    """
    r = chain.base_pose.rotation if base_rotation is None else base_rotation
    n = chain.n_segments
    thetas = np.zeros(n)
    phis = np.zeros(n)
    for j in range(n):
        z_local = r.T @ chain.dirs[j + 1]
        theta = float(np.arccos(np.clip(z_local[2], -1.0, 1.0)))
        phi = 0.0 if theta < 1e-12 else normalize_phi(float(np.arctan2(z_local[1], z_local[0])))
        thetas[j] = theta
        phis[j] = phi
        r = r @ segment_rotation(theta, phi)
    return thetas, phis, r


def chain_tip_pose(chain: LinkChain) -> Pose:
    """End-effector pose implied by the chain (position and full frame)."""
    _, _, r = chain_angles(chain)
    return Pose(chain.tip_position(), r)


def link_to_arc(chain: LinkChain, tol: float = 1e-6) -> ArmShape:
    """Convert a chain back to arc parameters.

    Raises ChainError when the chain violates its invariants beyond `tol`
    (the angles would not reproduce the node geometry in that case).
    """
    res = chain.consistency_residual()
    if res > tol:
        raise ChainError(f"chain invariants violated by {res:.3e} (tol {tol:.1e})")
    thetas, phis, _ = chain_angles(chain)
    segs = tuple(SegmentArc(float(t), float(p), float(l))
                 for t, p, l in zip(thetas, phis, chain.seg_lengths))
    return ArmShape(segs, chain.connector, chain.base_extension, chain.base_pose)
