"""Joint-limit and obstacle handling for constrained planning.

Candidate virtual joints are generated on two surfaces: a cone around the
segment's anchored tangent whose half-angle is the bending limit, and a
sphere around the segment's own joint whose radius preserves the current
inter-joint distance (so accepting a candidate does not stretch the chain).
A candidate is kept only when the whole reconstructed segment arc clears
every obstacle and respects the bending limit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import virtual_link_length
from .geometry import rotate_about_axis


class SceneError(ValueError):
    pass


@dataclass(frozen=True)
class SphereObstacle:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(3))
        if self.radius <= 0.0:
            raise SceneError("obstacle radius must be positive")


@dataclass(frozen=True)
class Scene:
    """Planning environment: obstacles, joint limits and base mobility."""
    obstacles: tuple[SphereObstacle, ...] = ()
    theta_max: float = float(0.89 * np.pi)   # per-segment bending limit (rad)
    arm_radius: float = 0.0095               # clearance padding around the centerline
    base_mode: str = "free-floating"         # fixed | prismatic-z | free-floating
    extension_limit: float = 0.100           # prismatic stroke bound (m)

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        if not (0.0 < self.theta_max < np.pi):
            raise SceneError("theta_max must be in (0, pi)")
        if self.arm_radius < 0.0:
            raise SceneError("arm_radius must be >= 0")
        if self.base_mode not in ("fixed", "prismatic-z", "free-floating"):
            raise SceneError(f"unknown base_mode {self.base_mode!r}")


def cone_candidate(axis: np.ndarray, theta_max: float, theta_r: float) -> np.ndarray:
    """Direction on the cone of half-angle theta_max around `axis`.

    The in-plane reference is horizontal and perpendicular to the axis
    ([1,0,0] when the axis is vertical), rotated about the axis by the
    random angle theta_r before being tilted onto the cone.
    """
    axis = np.asarray(axis, dtype=float)
    if not (0.0 < theta_max < np.pi):
        raise SceneError("theta_max must be in (0, pi)")
    h = np.hypot(axis[0], axis[1])
    if h < 1e-12:
        v_c = np.array([1.0, 0.0, 0.0])
    else:
        v_c = np.array([-axis[1], axis[0], 0.0]) / h
    v_cr = rotate_about_axis(axis, theta_r) @ v_c
    return v_cr * np.sin(theta_max) + axis * np.cos(theta_max)


def segment_arc_points(tip_node: np.ndarray, tip_dir: np.ndarray, base_dir: np.ndarray,
                       seg_len: float, theta: float, resolution: float) -> np.ndarray:
    """Sample the constant-curvature arc implied by the tip anchor, the two
    junction tangents and the arc length."""
    tip_node = np.asarray(tip_node, dtype=float)
    tip_dir = np.asarray(tip_dir, dtype=float)
    base_dir = np.asarray(base_dir, dtype=float)
    link_len = virtual_link_length(theta, seg_len)
    vj = tip_node - tip_dir * link_len
    base_node = vj - base_dir * link_len
    n = max(2, int(np.ceil(seg_len / resolution)) + 1)
    s = np.linspace(0.0, seg_len, n)
    if theta < 1e-9:
        return base_node + np.outer(s, base_dir)
    kappa = theta / seg_len
    w = (tip_dir - base_dir * np.cos(theta)) / np.sin(theta)
    return (base_node
            + np.outer(np.sin(kappa * s) / kappa, base_dir)
            + np.outer((1.0 - np.cos(kappa * s)) / kappa, w))


def adcek(vj: np.ndarray, vj_prev: np.ndarray, tip_node: np.ndarray, tip_dir: np.ndarray,
          seg_len: float, theta_max: float, obstacles, arm_radius: float = 0.0,
          resolution: float = 0.005) -> bool:
    """Feasibility check for the segment whose tip sits at (tip_node, tip_dir)
    and whose base-side stretch runs from `vj_prev` to `vj`.

    True iff the implied bending angle respects theta_max and the sampled
    segment arc clears every obstacle. Samples are spaced `resolution`
    apart and checked with an extra half-spacing margin, which makes the
    clearance claim hold along the whole continuous arc (the distance to an
    obstacle center is 1-Lipschitz in arc length).
    """
    vj = np.asarray(vj, dtype=float)
    vj_prev = np.asarray(vj_prev, dtype=float)
    diff = vj - vj_prev
    norm = np.linalg.norm(diff)
    base_dir = np.asarray(tip_dir, dtype=float) if norm < 1e-12 else diff / norm
    cth = float(np.clip(np.dot(tip_dir, base_dir), -1.0, 1.0))
    theta = float(np.arccos(cth))
    if theta > theta_max + 1e-9:  # tolerance keeps exact-boundary cone candidates valid
        return False
    if not obstacles:
        return True
    pts = segment_arc_points(tip_node, tip_dir, base_dir, seg_len, theta, resolution)
    spacing = seg_len / (len(pts) - 1)
    margin = 0.5 * spacing
    for ob in obstacles:
        d = np.linalg.norm(pts - ob.center, axis=1)
        if np.min(d) < ob.radius + arm_radius + margin:
            return False
    return True


def sphere_candidates(center: np.ndarray, radius: float, obstacles,
                      n_lat: int = 8, n_lon: int = 16) -> np.ndarray:
    """Deterministic candidate points on the search sphere.

    The enumeration starts at the pole pointing away from the nearest
    obstacle (straight up when the scene is empty), then sweeps latitude
    bands from the pole down, each band scanned through all longitudes.
    """
    center = np.asarray(center, dtype=float)
    if radius <= 0.0 or n_lat < 1 or n_lon < 1:
        raise SceneError("radius and grid sizes must be positive")
    pole = np.array([0.0, 0.0, 1.0])
    if obstacles:
        nearest = min(obstacles,
                      key=lambda ob: np.linalg.norm(center - ob.center) - ob.radius)
        d = center - nearest.center
        if np.linalg.norm(d) > 1e-12:
            pole = d / np.linalg.norm(d)
    e1 = np.array([1.0, 0.0, 0.0]) if abs(pole[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = e1 - np.dot(e1, pole) * pole
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(pole, e1)
    pts = [center + pole * radius]
    for i in range(1, n_lat):
        alpha = i * np.pi / n_lat
        ca, sa = np.cos(alpha), np.sin(alpha)
        for ii in range(n_lon):
            xi = ii * 2.0 * np.pi / n_lon
            pts.append(center + radius * (ca * pole + sa * (np.cos(xi) * e1 + np.sin(xi) * e2)))
    return np.array(pts)


def _project_to_cone(direction: np.ndarray, axis: np.ndarray, theta_max: float) -> np.ndarray:
    """Pull a unit direction inside the cone of half-angle theta_max about axis."""
    cth = float(np.clip(np.dot(direction, axis), -1.0, 1.0))
    if np.arccos(cth) <= theta_max:
        return direction
    w = direction - cth * axis
    norm = np.linalg.norm(w)
    if norm < 1e-12:
        w = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        w = w - np.dot(w, axis) * axis
        norm = np.linalg.norm(w)
    w /= norm
    return axis * np.cos(theta_max) + w * np.sin(theta_max)


def update_virtual_joint(tip_node: np.ndarray, tip_dir: np.ndarray, vj: np.ndarray,
                         vj_prev: np.ndarray, seg_len: float, theta_max: float,
                         scene: Scene, rng: np.random.Generator,
                         n_lat: int = 8, n_lon: int = 16,
                         resolution: float = 0.005) -> tuple[np.ndarray, bool]:
    """Adjusted reference joint for the next-inner segment.

    Keeps the old joint when it already passes the feasibility check.
    Otherwise scans, in deterministic order, one random cone candidate at
    the bending limit followed by the sphere grid (each grid point projected
    into the bending-limit cone), returning the first candidate that clears
    every obstacle. Returns (joint, fallback) where fallback marks the
    everything-failed case in which the old joint is returned unchanged.
    """
    tip_node = np.asarray(tip_node, dtype=float)
    tip_dir = np.asarray(tip_dir, dtype=float)
    vj = np.asarray(vj, dtype=float)
    vj_prev = np.asarray(vj_prev, dtype=float)

    def ok(candidate):
        return adcek(vj, candidate, tip_node, tip_dir, seg_len, theta_max,
                     scene.obstacles, scene.arm_radius, resolution)

    if ok(vj_prev):
        return vj_prev, False
    radius = float(np.linalg.norm(vj - vj_prev))
    if radius < 1e-12:
        return vj_prev, True
    b = cone_candidate(tip_dir, theta_max, float(rng.uniform(0.0, 2.0 * np.pi)))
    candidates = [vj - b * radius]
    for g in sphere_candidates(vj, radius, scene.obstacles, n_lat, n_lon):
        u = vj - g
        norm = np.linalg.norm(u)
        if norm < 1e-12:
            continue
        u = _project_to_cone(u / norm, tip_dir, theta_max)
        candidates.append(vj - u * radius)
    for candidate in candidates:
        if ok(candidate):
            return candidate, False
    return vj_prev, True
