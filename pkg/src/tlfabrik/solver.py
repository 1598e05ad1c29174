"""Two-layer geometric iteration solver.

The inner layer is a forward/backward reaching pair over the virtual link
chain; one pair counts as one iteration. The outer layer removes the
rotation residual about the tool z-axis, which the inner layer alone cannot
control, by rotating the chain as a rigid body between sweeps. Four
workmodes are scheduled by two conditions: Ca (the scalar position error has
stagnated or stopped improving over the last three records) and Cb (the
iteration share assigned to the current mode is used up).

  workmode 1  rotate the chain about the tool z-axis (through the tool
              point, measured right after the forward sweep, when the tip
              exactly matches the target): the base end swings, the
              following backward sweep re-anchors it.
  workmode 2  rotate the chain about the mount z-axis (through the mount):
              the tool end swings, the following forward sweep re-anchors it.
  workmode 3  both of the above at half the measured residual each.
  workmode 4  draw a random arm shape within joint limits and run a nested
              solve (workmodes 1-3 only) on it; the result is adopted when
              it improves on the current position error.

Reaching the wrap index w_c resets the schedule to workmode 1 and clears the
per-mode counters.

The reaching pair partially absorbs each applied rotation, so near a
solution the residual contracts roughly linearly from one pass to the next.
When two consecutive same-mode residuals expose that contraction, the
applied rotation is extrapolated to the predicted limit (clamped Aitken
step); without it the slow tail stalls out whole percentage points of the
hard zero-redundancy tasks.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .arc import ArmShape, SegmentArc, forward_kinematics
from .chain import LinkChain, arc_to_link, chain_angles
from .fabrik import backward_reach, forward_reach
from .geometry import Pose, pose_error, rotate_about_axis, twist_about_axis


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    """Budgets, tolerances and scheduling knobs of the two-layer solver."""
    k_max1: int = 2000                  # total inner-iteration budget
    k_max2: int = 20                    # random restarts allowed per mode cycle
    k_max1_w4: int = 50                 # inner budget of one nested restart solve
    p_wm: tuple[float, float, float, float] = (0.3, 0.3, 0.3, 0.1)
    e_min: float = 1e-5                 # position tolerance (m) = 0.01 mm
    rot_min: float = float(np.deg2rad(0.2))  # orientation tolerance (rad)
    epsilon_ca: float = 1e-7            # stagnation threshold on position error (m)
    w_c: int = 5                        # workmode wrap index
    rng_seed: int = 0
    use_wm4: bool = True                # ablation switch: random-restart mode
    use_cb: bool = True                 # ablation switch: budget condition
    restart_theta_max: float = float(0.5 * np.pi)  # joint range sampled by restarts
    twist_extrapolation: float = 25.0   # Aitken gain cap; 1.0 disables

    def validate(self) -> None:
        if self.k_max1 < 1 or self.k_max2 < 1 or self.k_max1_w4 < 1:
            raise ConfigError("iteration budgets must be >= 1")
        if len(self.p_wm) != 4 or any(not (0.0 < p <= 1.0) for p in self.p_wm) \
                or sum(self.p_wm) > 1.0 + 1e-12:
            raise ConfigError("p_wm must be four fractions in (0, 1] summing to <= 1")
        if self.e_min <= 0.0 or self.rot_min <= 0.0 or self.epsilon_ca <= 0.0:
            raise ConfigError("tolerances must be positive")
        if self.w_c < 2:
            raise ConfigError("w_c must be >= 2")

    def ablated(self, name: str) -> "SolverConfig":
        """Named method variants: 'full', 'tlgi', 'tlgi-star', 'tlf-star'."""
        flags = {
            "full": (True, True),
            "tlgi": (False, False),
            "tlgi-star": (False, True),
            "tlf-star": (True, False),
        }
        if name not in flags:
            raise ConfigError(f"unknown ablation {name!r}; pick one of {sorted(flags)}")
        wm4, cb = flags[name]
        return replace(self, use_wm4=wm4, use_cb=cb)


@dataclass
class SolveReport:
    """Outcome of one solve.

    history[i] is the (pos_err, rot_err) pair visible after inner iteration
    i (index 0 is the initial configuration), so len(history) equals
    iterations + 1. k_wm counts inner iterations spent per workmode; nested
    restart iterations are charged to workmode 4.
    """
    success: bool
    shape: ArmShape
    iterations: int
    k_wm: np.ndarray
    history: list[tuple[float, float]]
    wall_time: float = 0.0

    @property
    def final_pos_err(self) -> float:
        return self.history[-1][0]

    @property
    def final_rot_err(self) -> float:
        return self.history[-1][1]


def convergence_judge(e_hist, epsilon_ca: float) -> bool:
    """Condition Ca over the last three scalar position errors.

    True when both recent steps changed the error by at most epsilon_ca
    (stagnation) or the error has not improved for two steps. Fewer than
    three records always give False.
    """
    if len(e_hist) < 3:
        return False
    e2, e1, e0 = e_hist[-3], e_hist[-2], e_hist[-1]
    stagnant = abs(e1 - e0) <= epsilon_ca and abs(e2 - e1) <= epsilon_ca
    non_improving = e0 >= e1 and e1 >= e2
    return bool(stagnant or non_improving)


def randomize_shape(template: ArmShape, limits, rng: np.random.Generator) -> ArmShape:
    """Random arm shape within per-segment bending limits; lengths, base and
    connector are taken from the template."""
    limits = np.broadcast_to(np.asarray(limits, dtype=float), (template.n_segments,))
    thetas = rng.uniform(0.0, limits)
    phis = rng.uniform(0.0, 2.0 * np.pi, template.n_segments)
    return template.with_angles(thetas, phis)


def _chain_errors(chain: LinkChain, target: Pose) -> tuple[float, float, np.ndarray]:
    """Position error, full-rotation error, and the composed tip frame."""
    _, _, r_tip = chain_angles(chain)
    pos = float(np.linalg.norm(chain.tip_position() - target.position))
    c = (np.trace(r_tip.T @ target.rotation) - 1.0) / 2.0
    rot = float(np.arccos(np.clip(c, -1.0, 1.0)))
    return pos, rot, r_tip


def _rotate_rigid(chain: LinkChain, axis: np.ndarray, center: np.ndarray, angle: float) -> None:
    r = rotate_about_axis(axis, angle)
    chain.joints[:] = (r @ (chain.joints - center).T).T + center
    chain.dirs[:] = (r @ chain.dirs.T).T


def _extrapolated(residual: float, key, state: dict, cap: float) -> float:
    """Aitken step: scale the residual by 1/(1-rho) when the ratio rho of
    consecutive same-site residuals indicates a linear contraction."""
    gain = 1.0
    prev = state.get(key)
    if prev is not None and prev != 0.0 and (prev > 0.0) == (residual > 0.0):
        rho = residual / prev
        if 0.2 < rho < 0.995:
            gain = min(1.0 / (1.0 - rho), cap)
    state[key] = residual
    return residual * gain


def _workmode_pass(chain: LinkChain, target: Pose, mode: int,
                   twist_state: dict, cap: float) -> LinkChain:
    out = chain.copy()
    if mode in (2, 3):
        # swing the tool end: rotate about the mount tangent through the mount
        _, _, r_tip = chain_angles(out)
        residual = twist_about_axis(target.rotation @ r_tip.T, out.base_dir)
        amount = _extrapolated(residual, ("base", mode), twist_state, cap)
        if mode == 3:
            amount *= 0.5
        _rotate_rigid(out, out.base_dir, out.base_node, amount)
    out = forward_reach(out, target)
    if mode in (1, 3):
        # tip twist is exact now that the forward sweep pinned the tool frame
        _, _, r_tip = chain_angles(out)
        residual = twist_about_axis(target.rotation @ r_tip.T, out.dirs[-1])
        amount = _extrapolated(residual, ("tip", mode), twist_state, cap)
        if mode == 3:
            amount *= 0.5
        _rotate_rigid(out, out.dirs[-1], out.tip_position(), amount)
    return backward_reach(out, tip_dir=target.z_axis)


def apply_workmode(chain: LinkChain, target: Pose, mode: int) -> LinkChain:
    """One outer-loop cycle of workmode 1, 2 or 3 (rotation plus one
    forward/backward reaching pair), without extrapolation memory."""
    if mode not in (1, 2, 3):
        raise ConfigError(f"workmode must be 1, 2 or 3, got {mode}")
    return _workmode_pass(chain, target, mode, {}, 1.0)


@dataclass
class _LoopResult:
    success: bool
    iterations: int
    k_wm: np.ndarray
    history: list[tuple[float, float]]
    final: LinkChain
    best: LinkChain
    best_pos: float


def _solve_loop(chain: LinkChain, target: Pose, cfg: SolverConfig,
                rng: np.random.Generator, template: ArmShape) -> _LoopResult:
    k_wm_total = np.zeros(4)   # cumulative, reported
    k_wm_cycle = np.zeros(4)   # reset on wrap, drives condition Cb
    history: list[tuple[float, float]] = []
    ca_window: list[float] = []  # outer-level position errors driving Ca

    pos, rot, _ = _chain_errors(chain, target)
    history.append((pos, rot))
    ca_window.append(pos)

    best = chain.copy()
    best_pos = pos
    w = 1
    w_wrap = cfg.w_c if cfg.use_wm4 else min(cfg.w_c, 4)
    restarts_this_cycle = 0
    iters = 0
    twist_state: dict = {}

    while not (pos <= cfg.e_min and rot <= cfg.rot_min):
        if iters >= cfg.k_max1:
            return _LoopResult(False, iters, k_wm_total, history, chain, best, best_pos)
        if w <= 3:
            chain = _workmode_pass(chain, target, w, twist_state, cfg.twist_extrapolation)
            k_wm_total[w - 1] += 1
            k_wm_cycle[w - 1] += 1
            iters += 1
            pos, rot, _ = _chain_errors(chain, target)
            history.append((pos, rot))
        else:
            restarts_this_cycle += 1
            seed_shape = randomize_shape(template, cfg.restart_theta_max, rng)
            nested_cfg = replace(cfg, k_max1=min(cfg.k_max1_w4, cfg.k_max1 - iters),
                                 use_wm4=False)
            nested = _solve_loop(arc_to_link(seed_shape), target, nested_cfg, rng, template)
            k_wm_total[3] += nested.iterations
            k_wm_cycle[3] += nested.iterations
            iters += nested.iterations
            history.extend(nested.history[1:])
            candidate = nested.final if nested.success else nested.best
            cand_pos = nested.history[-1][0] if nested.success else nested.best_pos
            if nested.success or cand_pos < pos:
                chain = candidate
            pos, rot, _ = _chain_errors(chain, target)
            # the last spliced record becomes the state the parent kept
            history[-1] = (pos, rot)
        ca_window.append(pos)
        if pos < best_pos:
            best = chain.copy()
            best_pos = pos

        ca = convergence_judge(ca_window, cfg.epsilon_ca)
        cb = cfg.use_cb and k_wm_cycle[w - 1] >= cfg.p_wm[w - 1] * cfg.k_max1
        w += int(ca) + int((not ca) and cb)
        if w == 4 and cfg.use_wm4 and restarts_this_cycle >= cfg.k_max2:
            w += 1  # randomization allowance spent; wrap instead
        if w >= w_wrap:
            w = 1
            k_wm_cycle[:] = 0
            restarts_this_cycle = 0
            twist_state.clear()
    return _LoopResult(True, iters, k_wm_total, history, chain, best, best_pos)


def _shape_from_chain(chain: LinkChain) -> ArmShape:
    # like link_to_arc but without the strictness: a best-effort chain from a
    # failed solve may carry a transient fold at a pinned junction
    thetas, phis, _ = chain_angles(chain)
    cap = np.pi * (1.0 - 1e-12)
    segs = tuple(SegmentArc(min(float(t), cap), float(p), float(l))
                 for t, p, l in zip(thetas, phis, chain.seg_lengths))
    return ArmShape(segs, chain.connector, chain.base_extension, chain.base_pose)


def solve(initial: ArmShape, target: Pose, cfg: SolverConfig | None = None) -> SolveReport:
    """Solve the 6-DOF inverse kinematics task `target` starting from
    `initial`. Never raises on unreachable targets: the report comes back
    with success False and the best configuration found."""
    cfg = cfg or SolverConfig()
    cfg.validate()
    rng = np.random.default_rng(cfg.rng_seed)
    t0 = time.perf_counter()
    result = _solve_loop(arc_to_link(initial), target, cfg, rng, initial)
    chain = result.final if result.success else result.best
    shape = _shape_from_chain(chain)
    success = result.success
    if success:
        # zero false successes: re-verify with an independent FK pass
        pos, rot = pose_error(forward_kinematics(shape), target)
        success = pos <= cfg.e_min and rot <= cfg.rot_min
    return SolveReport(success=success, shape=shape, iterations=result.iterations,
                       k_wm=result.k_wm.copy(), history=result.history,
                       wall_time=time.perf_counter() - t0)
