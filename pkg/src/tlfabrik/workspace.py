"""Reachable-workspace sampling and the per-cell effectiveness score.

Tip poses from uniformly sampled configurations are binned into cubic cells.
A cell's score S = N * (1 + D / D_max) rewards both the visit count N and
the dispersion D of tool directions inside the cell, where D is the average
pairwise angle between tip z-axes (defined for N >= 2, else 0) and D_max is
the fully-random reference dispersion of pi/2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arc import ArmShape, forward_kinematics, stroke_feasible, tendon_deltas

D_MAX = 0.5 * np.pi


@dataclass(frozen=True)
class WorkspaceCell:
    index: tuple[int, int, int]
    count: int
    dispersion: float
    score: float


@dataclass
class WorkspaceResult:
    points: np.ndarray          # (n, 6): tip position, tip z-axis
    feasible: np.ndarray        # (n,) bool, tendon-stroke feasibility
    cells: list[WorkspaceCell]
    cell_size: float
    thetas: np.ndarray          # (n, n_segments) sampled bending angles
    phis: np.ndarray

    @property
    def infeasible_fraction(self) -> float:
        return float(1.0 - np.mean(self.feasible)) if len(self.feasible) else 0.0


def pairwise_dispersion(z_axes: np.ndarray) -> float:
    """Average pairwise angle between unit directions; 0 for fewer than two."""
    n = len(z_axes)
    if n < 2:
        return 0.0
    g = np.clip(z_axes @ z_axes.T, -1.0, 1.0)
    iu = np.triu_indices(n, k=1)
    return float(np.mean(np.arccos(g[iu])))


def cell_score(count: int, dispersion: float) -> float:
    return count * (1.0 + dispersion / D_MAX)


def _evaluate_block(args):
    template, thetas, phis, hole_radius, stroke_limit = args
    points = np.zeros((len(thetas), 6))
    feasible = np.zeros(len(thetas), dtype=bool)
    for i in range(len(thetas)):
        shape = template.with_angles(thetas[i], phis[i])
        tip = forward_kinematics(shape)
        points[i, :3] = tip.position
        points[i, 3:] = tip.z_axis
        feasible[i] = stroke_feasible(tendon_deltas(shape, hole_radius), stroke_limit)
    return points, feasible


def sample_workspace(template: ArmShape, n_samples: int, rng: np.random.Generator,
                     theta_range: float = float(0.89 * np.pi),
                     phi_range: float = float(2.0 * np.pi),
                     cell_size: float = 0.1,
                     hole_radius: float = 0.0075,
                     stroke_limit: float = 0.030,
                     jobs: int = 1) -> WorkspaceResult:
    """Monte-Carlo workspace study of the arm described by `template`.

    Bending and direction angles are sampled uniformly in [0, theta_range]
    and [0, phi_range] per segment; the base extension is held at the
    template's value (it only shifts the cloud along the base axis). All
    angles are drawn up front from `rng`, so the result does not depend on
    the worker count.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if cell_size <= 0.0:
        raise ValueError("cell_size must be positive")
    n_seg = template.n_segments
    thetas = rng.uniform(0.0, theta_range, (n_samples, n_seg))
    phis = rng.uniform(0.0, phi_range, (n_samples, n_seg))
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        bounds = np.linspace(0, n_samples, jobs + 1).astype(int)
        blocks = [(template, thetas[a:b], phis[a:b], hole_radius, stroke_limit)
                  for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_evaluate_block, blocks))
        points = np.vstack([p for p, _ in parts])
        feasible = np.concatenate([f for _, f in parts])
    else:
        points, feasible = _evaluate_block((template, thetas, phis, hole_radius, stroke_limit))

    cells = []
    idx = np.floor(points[:, :3] / cell_size).astype(int)
    order: dict[tuple[int, int, int], list[int]] = {}
    for i, key in enumerate(map(tuple, idx)):
        order.setdefault(key, []).append(i)
    for key, members in sorted(order.items()):
        d = pairwise_dispersion(points[members, 3:])
        cells.append(WorkspaceCell(key, len(members), d, cell_score(len(members), d)))
    return WorkspaceResult(points, feasible, cells, cell_size, thetas, phis)
