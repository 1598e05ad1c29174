"""Reference paths for tracking and follow-the-leader planning."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Pose


class TrajectoryError(ValueError):
    pass


@dataclass(frozen=True)
class Trajectory:
    """Arc-length parameterized polyline with unit tangents."""
    points: np.ndarray    # (M, 3)
    tangents: np.ndarray  # (M, 3) unit
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        tans = np.asarray(self.tangents, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape != tans.shape or len(pts) < 2:
            raise TrajectoryError("need matching (M,3) points and tangents, M >= 2")
        norms = np.linalg.norm(tans, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-8):
            raise TrajectoryError("tangents must be unit vectors")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "tangents", tans)
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        object.__setattr__(self, "_s", np.concatenate([[0.0], np.cumsum(seg)]))

    @property
    def arclength(self) -> np.ndarray:
        return self._s

    @property
    def length(self) -> float:
        return float(self._s[-1])

    def point_at(self, s: float) -> np.ndarray:
        s = float(np.clip(s, 0.0, self.length))
        i = int(np.clip(np.searchsorted(self._s, s), 1, len(self._s) - 1))
        span = self._s[i] - self._s[i - 1]
        t = 0.0 if span <= 0.0 else (s - self._s[i - 1]) / span
        return self.points[i - 1] * (1.0 - t) + self.points[i] * t

    def tangent_at(self, s: float) -> np.ndarray:
        s = float(np.clip(s, 0.0, self.length))
        i = int(np.clip(np.searchsorted(self._s, s), 1, len(self._s) - 1))
        d = self.points[i] - self.points[i - 1]
        n = np.linalg.norm(d)
        return self.tangents[i] if n < 1e-15 else d / n

    def transformed(self, pose: Pose) -> "Trajectory":
        """The same curve rigidly moved by `pose` (its local frame)."""
        r, p = pose.rotation, pose.position
        return Trajectory((r @ self.points.T).T + p, (r @ self.tangents.T).T,
                          self.kind, dict(self.params))

    def distance_to(self, query: np.ndarray) -> float:
        """Shortest distance from a point to the polyline."""
        q = np.asarray(query, dtype=float)
        a, b = self.points[:-1], self.points[1:]
        ab = b - a
        denom = np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-30)
        t = np.clip(np.einsum("ij,ij->i", q - a, ab) / denom, 0.0, 1.0)
        proj = a + ab * t[:, None]
        return float(np.min(np.linalg.norm(q - proj, axis=1)))


def _arc_curve(radius: float, length: float, step: float, sign: float = 1.0,
               start: np.ndarray | None = None, start_tangent_angle: float = 0.0):
    """Planar x-z arc starting at `start` with heading angle
    start_tangent_angle (0 = +z, growing toward +x); sign picks the bending
    side."""
    n = max(2, int(np.ceil(length / step)) + 1)
    s = np.linspace(0.0, length, n)
    k = sign / radius  # signed curvature
    a0 = start_tangent_angle
    ang = a0 + k * s
    pts = np.stack([(np.cos(a0) - np.cos(ang)) / k,
                    np.zeros(n),
                    (np.sin(ang) - np.sin(a0)) / k], axis=1)
    tans = np.stack([np.sin(ang), np.zeros(n), np.cos(ang)], axis=1)
    if start is not None:
        pts = pts + np.asarray(start, dtype=float)
    return pts, tans


def make_trajectory(kind: str, step: float = 0.001, **params) -> Trajectory:
    """Build a named trajectory in its local frame (origin, initial tangent +z
    for the arc kinds; the figure-of-eight lies around the origin).

    kinds:
      arc       params: radius (m), length (m), azimuth (bend-plane angle)
      s_curve   params: radius (m), length (m); two opposite arcs of length/2
                joined tangentially
      infinity  params: amp_x, amp_y, fold (rad); planar figure-of-eight with
                both lobes folded out of plane by `fold`
    """
    if step <= 0.0:
        raise TrajectoryError("step must be positive")
    if kind == "arc":
        radius = float(params.get("radius", 0.2))
        length = float(params.get("length", 0.4))
        azimuth = float(params.get("azimuth", 0.0))
        if radius <= 0.0 or length <= 0.0:
            raise TrajectoryError("arc needs positive radius and length")
        pts, tans = _arc_curve(radius, length, step)
        c, s = np.cos(azimuth), np.sin(azimuth)
        rz = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        return Trajectory((rz @ pts.T).T, (rz @ tans.T).T, kind,
                          {"radius": radius, "length": length, "azimuth": azimuth})
    if kind == "s_curve":
        radius = float(params.get("radius", 0.106))
        length = float(params.get("length", 0.250))
        if radius <= 0.0 or length <= 0.0:
            raise TrajectoryError("s_curve needs positive radius and length")
        half = length / 2.0
        p1, t1 = _arc_curve(radius, half, step, sign=+1.0)
        ang1 = half / radius
        p2, t2 = _arc_curve(radius, half, step, sign=-1.0,
                            start=p1[-1], start_tangent_angle=ang1)
        pts = np.vstack([p1, p2[1:]])
        tans = np.vstack([t1, t2[1:]])
        return Trajectory(pts, tans, kind, {"radius": radius, "length": length})
    if kind == "infinity":
        amp_x = float(params.get("amp_x", 0.2))
        amp_y = float(params.get("amp_y", 0.1))
        fold = float(params.get("fold", np.pi / 6.0))
        n = max(16, int(np.ceil(2.0 * np.pi * max(amp_x, amp_y) * 4.0 / step)))
        t = np.linspace(0.0, 2.0 * np.pi, n)
        x = amp_x * np.sin(t)
        y = amp_y * np.sin(2.0 * t)
        # fold both lobes symmetrically toward the center axis
        pts = np.stack([x * np.cos(fold), y, np.abs(x) * np.sin(fold)], axis=1)
        dx = amp_x * np.cos(t)
        dy = 2.0 * amp_y * np.cos(2.0 * t)
        tans = np.stack([dx * np.cos(fold), dy, np.sign(x) * dx * np.sin(fold)], axis=1)
        norms = np.linalg.norm(tans, axis=1)
        norms[norms < 1e-12] = 1.0
        tans = tans / norms[:, None]
        return Trajectory(pts, tans, kind, {"amp_x": amp_x, "amp_y": amp_y, "fold": fold})
    raise TrajectoryError(f"unknown trajectory kind {kind!r}")
