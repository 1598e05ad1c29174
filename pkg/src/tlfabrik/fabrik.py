"""Forward- and backward-reaching sweeps over the virtual link chain.

A sweep anchors one end of the chain (the target tip for the forward pass,
the mount for the backward pass) and walks segment by segment toward the
other end. Each segment update is purely geometric: the virtual joint is
provisionally extended along the anchored tangent, the new bending angle is
read off against the neighbouring joint, and the virtual link length is
refreshed from that angle before the joint is placed for good. Segment arc
lengths are never modified.
"""
from __future__ import annotations

import numpy as np

from .chain import LinkChain, virtual_link_length
from .geometry import Pose

# Keep updated bending angles strictly inside [0, pi): at pi the virtual
# link length diverges. The margin is sized so float64 can still verify the
# length/angle relation (d|vl|/dtheta ~ sec^2 blows past any tolerance
# closer to pi); real joint ranges stay well below this in any case. When a
# transient fold exceeds the cap, the far-side tangent is pulled onto the
# cap cone so tangents, angle and link length stay mutually consistent.
THETA_CAP = np.pi - 0.05


def _any_perpendicular(v: np.ndarray) -> np.ndarray:
    p = np.array([1.0, 0.0, 0.0]) if abs(v[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    p = p - np.dot(p, v) * v
    return p / np.linalg.norm(p)


def _bend_update(anchor_dir: np.ndarray, far_dir: np.ndarray, seg_len: float):
    """Bending angle between the two segment tangents, with the far tangent
    clamped to the cap cone when a transient fold exceeds it.

    Returns (theta, link_len, far_dir).
    """
    # acos clamped: float dot products drift past [-1, 1] by ~1e-16
    cth = float(np.clip(np.dot(anchor_dir, far_dir), -1.0, 1.0))
    theta = float(np.arccos(cth))
    if theta > THETA_CAP:
        w = far_dir - cth * anchor_dir
        norm = np.linalg.norm(w)
        w = _any_perpendicular(anchor_dir) if norm < 1e-12 else w / norm
        far_dir = np.cos(THETA_CAP) * anchor_dir + np.sin(THETA_CAP) * w
        theta = THETA_CAP
    return theta, virtual_link_length(theta, seg_len), far_dir


def update_segment(target_node: np.ndarray, target_dir: np.ndarray, prev_vj: np.ndarray,
                   seg_len: float, old_link_len: float):
    """Single-segment tip-anchored update.

    Returns (new_vj, new_link_len, new_theta, new_dir) where new_dir is the
    updated base-side tangent of the segment, pointing tip-ward. Degenerate
    geometry (provisional joint coinciding with the reference joint) falls
    back to a straight segment.
    """
    target_node = np.asarray(target_node, dtype=float)
    target_dir = np.asarray(target_dir, dtype=float)
    prov = target_node - target_dir * old_link_len
    diff = prov - np.asarray(prev_vj, dtype=float)
    norm = np.linalg.norm(diff)
    raw_dir = target_dir if norm < 1e-12 else diff / norm
    theta, link_len, new_dir = _bend_update(target_dir, raw_dir, seg_len)
    return target_node - target_dir * link_len, link_len, theta, new_dir


def forward_reach(chain: LinkChain, target: Pose) -> LinkChain:
    """Tip-anchored sweep: pins the end-effector at the target position with
    the target z-axis and updates segments from tip to base. The base end is
    generally left displaced from the mount."""
    out = chain.copy()
    n = out.n_segments
    tgt_dir = target.z_axis.copy()
    node = target.position - tgt_dir * out.connector  # last arc tip node
    ndir = tgt_dir
    out.dirs[n] = ndir
    for j in range(n - 1, -1, -1):
        if j > 0:
            vj, link_len, _, new_dir = update_segment(node, ndir, out.joints[j - 1],
                                                      out.seg_lengths[j], out.link_lengths[j])
        else:
            # innermost segment bends against the prescribed mount tangent,
            # which is never clamped; a beyond-cap fold here leaves a
            # transient angle/length mismatch that the next sweep heals
            _, link_len, _ = _bend_update(ndir, out.base_dir, out.seg_lengths[0])
            new_dir = out.base_dir
            vj = node - ndir * link_len
        out.joints[j] = vj
        out.link_lengths[j] = link_len
        out.dirs[j] = new_dir
        if j > 0:
            node = vj - new_dir * (link_len + out.connector)
            ndir = new_dir
    return out


def backward_reach(chain: LinkChain, base: Pose | None = None,
                   tip_dir: np.ndarray | None = None) -> LinkChain:
    """Base-anchored sweep: restores the base node and tangent, then updates
    segments base to tip. The final segment's far side is re-pinned to
    `tip_dir` (default: the chain's current tip tangent, i.e. the target
    z-axis left in place by the preceding forward sweep)."""
    out = chain.copy()
    if base is not None:
        out.base_pose = base
    n = out.n_segments
    far_dir = out.dirs[n].copy() if tip_dir is None else np.asarray(tip_dir, dtype=float)
    node = out.base_node.copy()
    ndir = out.base_dir.copy()
    out.dirs[0] = ndir
    for j in range(n):
        if j < n - 1:
            prov = node + ndir * out.link_lengths[j]
            diff = out.joints[j + 1] - prov
            norm = np.linalg.norm(diff)
            raw_dir = ndir if norm < 1e-12 else diff / norm
            theta, link_len, new_dir = _bend_update(ndir, raw_dir, out.seg_lengths[j])
        else:
            # the re-pinned tip tangent is never clamped (see forward_reach)
            _, link_len, _ = _bend_update(ndir, far_dir, out.seg_lengths[j])
            new_dir = far_dir
        out.joints[j] = node + ndir * link_len
        out.link_lengths[j] = link_len
        out.dirs[j + 1] = new_dir
        node = out.joints[j] + new_dir * (link_len + out.connector)
        ndir = new_dir
    return out
