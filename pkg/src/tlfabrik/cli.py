"""Command-line interface: solve one task, plan a follow-the-leader run,
sample a workspace, or benchmark the solver variants.

Exit codes: 0 success, 1 usage or input error, 2 solver reported failure.
Every emitted file carries a manifest (seed, effective config, git revision)
sufficient to reproduce it.
"""
from __future__ import annotations

import argparse
import csv
import json
import subprocess
import sys

import numpy as np

from .arc import forward_kinematics, tendon_deltas
from .bench import METHODS, run_benchmark
from .chain import arc_to_link
from .constraints import Scene
from .fileio import (SCHEMA_VERSION, config_to_dict, default_robot, load_config,
                     load_robot, load_scene, pose_from_dict, pose_to_dict,
                     robot_to_dict, shape_from_dict, shape_to_dict)
from .ftl import extend_from_tip, ftl_plan
from .solver import SolverConfig, solve
from .trajectory import make_trajectory
from .workspace import sample_workspace


def _git_revision() -> str:
    try:
        out = subprocess.run(["git", "rev-parse", "--short", "HEAD"],
                             capture_output=True, text=True, timeout=5)
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


def _manifest(args, cfg: SolverConfig) -> dict:
    return {"schema_version": SCHEMA_VERSION,
            "seed": getattr(args, "seed", None),
            "config": config_to_dict(cfg),
            "git_revision": _git_revision(),
            "command": vars_without_none(args)}


def vars_without_none(args) -> dict:
    return {k: v for k, v in vars(args).items() if v is not None and k != "func"}


def _load_cfg(args) -> SolverConfig:
    cfg = load_config(args.config) if args.config else SolverConfig()
    if getattr(args, "seed", None) is not None:
        from dataclasses import replace
        cfg = replace(cfg, rng_seed=args.seed)
    ablation = getattr(args, "ablation", None)
    if ablation:
        cfg = cfg.ablated(ablation)
    if getattr(args, "no_wm4", False):
        from dataclasses import replace
        cfg = replace(cfg, use_wm4=False)
    if getattr(args, "no_cb", False):
        from dataclasses import replace
        cfg = replace(cfg, use_cb=False)
    return cfg


def _load_robot(args):
    if args.robot:
        return load_robot(args.robot)
    return default_robot(getattr(args, "segments", None) or 3)


def cmd_solve(args) -> int:
    robot = _load_robot(args)
    cfg = _load_cfg(args)
    with open(args.target) as fh:
        target_data = json.load(fh)
    target = pose_from_dict(target_data)
    initial = robot.template_shape()
    if args.initial:
        with open(args.initial) as fh:
            initial = shape_from_dict(json.load(fh))
    report = solve(initial, target, cfg)
    deltas = tendon_deltas(report.shape, robot.hole_radius)
    out = {"schema_version": SCHEMA_VERSION,
           "success": bool(report.success),
           "iterations": report.iterations,
           "k_wm": [float(k) for k in report.k_wm],
           "wall_time_s": report.wall_time,
           "final_pos_err_m": report.final_pos_err,
           "final_rot_err_rad": report.final_rot_err,
           "shape": shape_to_dict(report.shape),
           "tip_pose": pose_to_dict(forward_kinematics(report.shape)),
           "tendon_deltas_m": deltas.delta.tolist(),
           "history": [[p, r] for p, r in report.history],
           "manifest": _manifest(args, cfg)}
    if args.dump_chain:
        out["chain_polyline"] = arc_to_link(report.shape).polyline().tolist()
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0 if report.success else 2


def _scenario_extension(name: str):
    # demonstration scenario: 4-segment arm feeding along a 200 mm-radius,
    # 400 mm-long arc appended at the tool
    if name != "arc-demo":
        raise ValueError(f"unknown scenario {name!r} (available: arc-demo)")
    robot = default_robot(4)
    template = robot.template_shape()
    initial = template.with_angles([0.29, 0.77, 0.70, 1.01], [2.75, 0.40, 4.81, 4.99])
    traj = make_trajectory("arc", radius=0.2, length=0.4)
    return robot, initial, traj, Scene(base_mode="free-floating")


def cmd_ftl(args) -> int:
    cfg = _load_cfg(args)
    if args.scenario:
        robot, initial, local_traj, scene = _scenario_extension(args.scenario)
    else:
        if not args.scene:
            print("ftl: need --scenario or --scene", file=sys.stderr)
            return 1
        robot = _load_robot(args)
        scene, traj_spec = load_scene(args.scene)
        if traj_spec is None:
            print("ftl: scene file carries no trajectory spec", file=sys.stderr)
            return 1
        initial = robot.template_shape()
        if args.initial:
            with open(args.initial) as fh:
                initial = shape_from_dict(json.load(fh))
        kind = traj_spec.pop("kind")
        local_traj = make_trajectory(kind, **traj_spec)
    extension = extend_from_tip(initial, local_traj)
    report = ftl_plan(initial, extension, scene, cfg, step=args.step)

    prefix = args.out
    with open(f"{prefix}_profile.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["arc_position_m", "deviation_m"])
        writer.writerows(report.profile.tolist())
    shapes = {"schema_version": SCHEMA_VERSION,
              "mean_deviation_m": report.mean_deviation,
              "max_deviation_m": report.max_deviation,
              "increments": [{"shape": shape_to_dict(inc.shape),
                              "converged": inc.converged,
                              "iterations": inc.iterations,
                              "tip_error_m": inc.tip_error,
                              "base_arclength_m": inc.base_arclength}
                             for inc in report.increments],
              "manifest": _manifest(args, cfg)}
    with open(f"{prefix}_shapes.json", "w") as fh:
        json.dump(shapes, fh, indent=2)
    print(f"ftl: {len(report.increments)} increments, mean deviation "
          f"{report.mean_deviation * 1e3:.2f} mm, max {report.max_deviation * 1e3:.2f} mm")
    print(f"wrote {prefix}_profile.csv, {prefix}_shapes.json")
    return 0


def cmd_workspace(args) -> int:
    robot = _load_robot(args)
    cfg = _load_cfg(args)
    rng = np.random.default_rng(args.seed)
    result = sample_workspace(robot.template_shape(), args.samples, rng,
                              theta_range=args.theta_range, phi_range=args.phi_range,
                              cell_size=args.cell_size,
                              hole_radius=robot.hole_radius,
                              stroke_limit=robot.stroke_limit,
                              jobs=args.jobs)
    prefix = args.out
    with open(f"{prefix}_points.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "z", "zx", "zy", "zz", "stroke_feasible"])
        for row, ok in zip(result.points, result.feasible):
            writer.writerow(list(row) + [int(ok)])
    with open(f"{prefix}_cells.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "k", "N", "D", "S"])
        for cell in result.cells:
            writer.writerow([*cell.index, cell.count, cell.dispersion, cell.score])
    if args.layers:
        # per-layer slices of the cloud along x, one file per populated bin
        bins = np.floor(result.points[:, 0] / args.cell_size).astype(int)
        for b in sorted(set(bins)):
            sel = bins == b
            with open(f"{prefix}_layer_x{b:+03d}.csv", "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["x", "y", "z", "zx", "zy", "zz", "stroke_feasible"])
                for row, ok in zip(result.points[sel], result.feasible[sel]):
                    writer.writerow(list(row) + [int(ok)])
    manifest = _manifest(args, cfg)
    manifest["robot"] = robot_to_dict(robot)
    manifest["infeasible_fraction"] = result.infeasible_fraction
    with open(f"{prefix}_manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
    print(f"workspace: {args.samples} samples, {len(result.cells)} cells, "
          f"infeasible fraction {result.infeasible_fraction:.4f}")
    print(f"wrote {prefix}_points.csv, {prefix}_cells.csv, {prefix}_manifest.json")
    return 0


def cmd_bench(args) -> int:
    robot = _load_robot(args)
    cfg = _load_cfg(args)
    methods = tuple(args.methods.split(","))
    stats = run_benchmark(robot.template_shape(), args.tasks, cfg, methods=methods,
                          seed=args.seed, jobs=args.jobs)
    prefix = args.out
    with open(f"{prefix}.csv", "w", newline="") as fh:
        rows = stats.rows()
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    manifest = _manifest(args, cfg)
    manifest["robot"] = robot_to_dict(robot)
    manifest["methods"] = list(methods)
    with open(f"{prefix}_manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
    for row in stats.rows():
        print(f"{row['segments']}-seg {row['method']}: success {row['success_rate'] * 100:.1f}% "
              f"iters(top100) {row['iters_top100']:.2f} time(top100) {row['time_ms_top100']:.2f} ms")
    print(f"wrote {prefix}.csv, {prefix}_manifest.json")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tlfabrik",
                                     description="Continuum-arm inverse kinematics and planning")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--robot", help="robot description JSON")
        p.add_argument("--config", help="solver config JSON")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--ablation", choices=list(METHODS), help="solver variant")
        p.add_argument("--no-wm4", action="store_true", help="disable random restarts")
        p.add_argument("--no-cb", action="store_true", help="disable the budget condition")

    p = sub.add_parser("solve", help="solve one inverse-kinematics task")
    common(p)
    p.add_argument("--target", required=True, help="target pose JSON")
    p.add_argument("--initial", help="initial shape JSON (default: straight)")
    p.add_argument("--dump-chain", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("ftl", help="follow-the-leader plan along a trajectory")
    common(p)
    p.add_argument("--scenario", help="built-in scenario name (arc-demo)")
    p.add_argument("--scene", help="scene JSON with obstacles and trajectory")
    p.add_argument("--initial", help="initial shape JSON")
    p.add_argument("--step", type=float, default=0.005, help="advance per increment (m)")
    p.add_argument("--out", default="ftl", help="output file prefix")
    p.set_defaults(func=cmd_ftl)

    p = sub.add_parser("workspace", help="Monte-Carlo workspace sampling")
    common(p)
    p.add_argument("--segments", type=int, default=3)
    p.add_argument("--samples", type=int, default=5000)
    p.add_argument("--theta-range", type=float, default=float(0.89 * np.pi))
    p.add_argument("--phi-range", type=float, default=float(2 * np.pi))
    p.add_argument("--cell-size", type=float, default=0.1)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--layers", action="store_true",
                   help="also write per-layer point slices along x")
    p.add_argument("--out", default="workspace", help="output file prefix")
    p.set_defaults(func=cmd_workspace)

    p = sub.add_parser("bench", help="benchmark solver variants")
    common(p)
    p.add_argument("--segments", type=int, default=3)
    p.add_argument("--tasks", type=int, default=100)
    p.add_argument("--methods", default="full,tlgi",
                   help="comma list from: " + ",".join(METHODS))
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="bench", help="output file prefix")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
