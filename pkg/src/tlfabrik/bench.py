"""Randomized inverse-kinematics benchmark across solver variants.

Every task pairs a random initial configuration with a target pose obtained
from the forward kinematics of another random configuration, so each target
is exactly reachable. All method variants see identical tasks and identical
restart seeds; per-task random streams are derived from (seed, task index)
which keeps results byte-stable regardless of worker count.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .arc import ArmShape, forward_kinematics
from .geometry import pose_error
from .solver import SolverConfig, solve

METHODS = ("full", "tlgi", "tlgi-star", "tlf-star")

TOP_FRACTIONS = (0.2, 0.6, 1.0)


@dataclass
class MethodStats:
    method: str
    n_tasks: int
    success_rate: float
    iters_top: dict            # fraction -> mean iterations over the best tasks
    time_ms_top: dict          # fraction -> mean wall time (ms)
    iterations: np.ndarray     # per-task
    times_ms: np.ndarray
    successes: np.ndarray


@dataclass
class BenchStats:
    n_segments: int
    n_tasks: int
    seed: int
    per_method: dict = field(default_factory=dict)

    def rows(self):
        """Flat rows: method, success rate and top-20/60/100% averages."""
        out = []
        for method, st in self.per_method.items():
            row = {"segments": self.n_segments, "method": method,
                   "success_rate": st.success_rate}
            for frac in TOP_FRACTIONS:
                row[f"iters_top{int(frac * 100)}"] = st.iters_top[frac]
            for frac in TOP_FRACTIONS:
                row[f"time_ms_top{int(frac * 100)}"] = st.time_ms_top[frac]
            out.append(row)
        return out


def _sorted_prefix_means(values: np.ndarray) -> dict:
    ordered = np.sort(np.asarray(values, dtype=float))
    out = {}
    for frac in TOP_FRACTIONS:
        k = max(1, int(round(frac * len(ordered))))
        out[frac] = float(np.mean(ordered[:k]))
    return out


def generate_task(template: ArmShape, seed: int, index: int,
                  theta_range: float = float(0.5 * np.pi),
                  phi_range: float = float(2.0 * np.pi)):
    """(initial shape, target pose) for one benchmark task."""
    rng = np.random.default_rng([seed, index])
    n = template.n_segments
    initial = template.with_angles(rng.uniform(0.0, theta_range, n),
                                   rng.uniform(0.0, phi_range, n))
    goal = template.with_angles(rng.uniform(0.0, theta_range, n),
                                rng.uniform(0.0, phi_range, n))
    return initial, forward_kinematics(goal)


def _run_task(args):
    template, seed, index, cfg, methods, theta_range, phi_range = args
    initial, target = generate_task(template, seed, index, theta_range, phi_range)
    solver_seed = int(np.random.default_rng([seed, index, 1]).integers(0, 2**31 - 1))
    out = {}
    for method in methods:
        mcfg = replace(cfg.ablated(method), rng_seed=solver_seed,
                       restart_theta_max=theta_range)
        rep = solve(initial, target, mcfg)
        ok = rep.success
        if ok:
            # benchmark-side revalidation, independent of the solver's claim
            pos, rot = pose_error(forward_kinematics(rep.shape), target)
            ok = pos <= mcfg.e_min and rot <= mcfg.rot_min
        out[method] = (ok, rep.iterations, rep.wall_time * 1e3)
    return index, out


def run_benchmark(template: ArmShape, n_tasks: int, cfg: SolverConfig | None = None,
                  methods=("full", "tlgi"), seed: int = 0, jobs: int = 1,
                  theta_range: float = float(0.5 * np.pi),
                  phi_range: float = float(2.0 * np.pi)) -> BenchStats:
    """Solve `n_tasks` random tasks with each method and aggregate ranked
    statistics. jobs > 1 parallelizes across tasks (timing columns are then
    noisier; use jobs=1 for clean measurements)."""
    cfg = cfg or SolverConfig()
    for m in methods:
        cfg.ablated(m)  # validate names up front
    task_args = [(template, seed, i, cfg, tuple(methods), theta_range, phi_range)
                 for i in range(n_tasks)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_task, task_args, chunksize=8))
    else:
        results = [_run_task(a) for a in task_args]
    results.sort(key=lambda r: r[0])

    stats = BenchStats(template.n_segments, n_tasks, seed)
    for method in methods:
        ok = np.array([r[1][method][0] for r in results])
        iters = np.array([r[1][method][1] for r in results], dtype=float)
        times = np.array([r[1][method][2] for r in results], dtype=float)
        stats.per_method[method] = MethodStats(
            method=method, n_tasks=n_tasks,
            success_rate=float(np.mean(ok)),
            iters_top=_sorted_prefix_means(iters),
            time_ms_top=_sorted_prefix_means(times),
            iterations=iters, times_ms=times, successes=ok)
    return stats
