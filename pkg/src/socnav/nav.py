"""Navigation: global graph planner, trajectory rollout, sub-policies.

The global planner runs uniform-cost search over the map's pose graph,
with the start and goal attached to every graph node within a connection
radius whose straight connector is wall-free. The local planner forward
simulates a grid of constant-curvature (v, w) commands for a fixed
horizon, discards arcs that pass too close to scan points, and scores
the rest by goal progress and clearance. On top of both sit the four
discrete actions the benchmark agent chooses from.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .geom import Pose2, Vec2, segments_cross, transform_to_frame
from .world import WorldMap

if TYPE_CHECKING:
    from .env import SimState
    from .humans import HumanState


class NoPathError(Exception):
    """Goal unreachable in the augmented navigation graph."""


class DiscreteAction(enum.IntEnum):
    HALT = 0
    GO_ALONE = 1
    FOLLOW = 2
    PASS = 3


@dataclass(frozen=True, slots=True)
class VelocityCommand:
    linear: float    # m/s
    angular: float   # rad/s


@dataclass(frozen=True, slots=True)
class MotionLimits:
    """Robot kinematic envelope; noise_std is (linear, angular) sigma."""

    v_max: float = 1.0
    w_max: float = 1.5
    a_max: float = 2.0
    alpha_max: float = 3.0
    noise_std: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if min(self.v_max, self.w_max, self.a_max, self.alpha_max) < 0:
            raise ValueError("motion limits must be nonnegative")
        if min(self.noise_std) < 0:
            raise ValueError("noise_std must be nonnegative")


@dataclass(frozen=True, slots=True)
class RolloutParams:
    """Local planner grid and scoring constants."""

    n_linear: int = 5
    n_angular: int = 11
    horizon: float = 2.0        # seconds of forward sweep
    margin: float = 0.1         # extra clearance beyond the robot radius
    w_prog: float = 1.0
    w_clear: float = 0.25
    clearance_cap: float = 2.0  # clearance beyond this does not add score
    robot_radius: float = 0.3


@dataclass(frozen=True, slots=True)
class NavParams:
    """Sub-policy and planner parameters."""

    control_period: float = 0.2
    connect_radius: float = 2.0
    waypoint_reach: float = 0.6
    follow_gap: float = 1.0
    pass_offset: float = 0.75
    pass_prediction: float = 1.0
    lead_cone: float = math.pi / 4
    lead_range: float = 5.0
    rollout: RolloutParams = field(default_factory=RolloutParams)


@dataclass(slots=True)
class GlobalPlan:
    """Waypoint route from start to goal; next_index tracks progress."""

    waypoints: tuple[Pose2, ...]
    cost: float
    next_index: int = 1

    def current_target(self, position: Vec2, reach: float) -> Vec2:
        """Advance past waypoints within `reach` and return the target.

        The final waypoint (the goal) is never skipped.
        """
        last = len(self.waypoints) - 1
        while (
            self.next_index < last
            and position.dist(self.waypoints[self.next_index].position) < reach
        ):
            self.next_index += 1
        return self.waypoints[self.next_index].position


def _connector_free(a: Vec2, b: Vec2, world: WorldMap) -> bool:
    return not any(segments_cross(a, b, wall) for wall in world.segments)


def plan_global(
    world: WorldMap, start: Pose2, goal: Pose2, connect_radius: float = 2.0
) -> GlobalPlan:
    """Shortest waypoint route over the nav graph from start to goal.

    Start and goal are linked to every nav node within connect_radius
    whose straight connector crosses no wall (plus directly to each other
    when that link qualifies). Raises NoPathError when no route exists.
    """
    n = len(world.nav_nodes)
    s_id, g_id = n, n + 1
    adj: dict[int, list[tuple[int, float]]] = {i: [] for i in range(n + 2)}
    for i, j, cost in world.nav_edges:
        adj[i].append((j, cost))
        adj[j].append((i, cost))

    for node_id, node in enumerate(world.nav_nodes):
        for term_id, pose in ((s_id, start), (g_id, goal)):
            d = pose.position.dist(node.position)
            if d <= connect_radius and _connector_free(pose.position, node.position, world):
                adj[term_id].append((node_id, d))
                adj[node_id].append((term_id, d))
    d_sg = start.position.dist(goal.position)
    if d_sg <= connect_radius and _connector_free(start.position, goal.position, world):
        adj[s_id].append((g_id, d_sg))

    dist: dict[int, float] = {s_id: 0.0}
    parent: dict[int, int] = {}
    frontier: list[tuple[float, int]] = [(0.0, s_id)]
    visited: set[int] = set()
    while frontier:
        d, u = heapq.heappop(frontier)
        if u in visited:
            continue
        visited.add(u)
        if u == g_id:
            break
        for v, cost in adj[u]:
            nd = d + cost
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                parent[v] = u
                heapq.heappush(frontier, (nd, v))
    if g_id not in visited:
        raise NoPathError(
            f"no route from ({start.position.x:.2f},{start.position.y:.2f}) to "
            f"({goal.position.x:.2f},{goal.position.y:.2f}) on map {world.name!r}"
        )

    node_path: list[int] = []
    cur = g_id
    while cur != s_id:
        node_path.append(cur)
        cur = parent[cur]
    node_path.append(s_id)
    node_path.reverse()

    waypoints: list[Pose2] = [start]
    for node_id in node_path[1:-1]:
        pose = world.nav_nodes[node_id]
        if (
            pose.position.dist(waypoints[-1].position) > 1e-9
            and pose.position.dist(goal.position) > 1e-9
        ):
            waypoints.append(pose)
    waypoints.append(goal)
    return GlobalPlan(waypoints=tuple(waypoints), cost=dist[g_id])


def _decel_command(
    v: float, w: float, limits: MotionLimits, control_period: float
) -> VelocityCommand:
    """Maximal deceleration of both velocity components toward zero."""
    dv = limits.a_max * control_period
    dw = limits.alpha_max * control_period
    linear = max(0.0, v - dv) if v > 0 else min(0.0, v + dv)
    angular = max(0.0, w - dw) if w > 0 else min(0.0, w + dw)
    return VelocityCommand(linear, angular)


def _arc_points(vs: np.ndarray, ws: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Constant-curvature sweep positions, shape (len(vs), len(ts), 2)."""
    v = vs[:, None]
    w = ws[:, None]
    t = ts[None, :]
    straight = np.abs(w) < 1e-9
    with np.errstate(divide="ignore", invalid="ignore"):
        radius = np.where(straight, 0.0, v / np.where(straight, 1.0, w))
        x = np.where(straight, v * t, radius * np.sin(w * t))
        y = np.where(straight, 0.0, radius * (1.0 - np.cos(w * t)))
    return np.stack([x, y], axis=-1)


def _sweep_min_distance(pts: np.ndarray, obstacles: np.ndarray) -> np.ndarray:
    """Min distance from each arc's sample points to any obstacle, (A,).

    Expanded |s - o|^2 = |s|^2 + |o|^2 - 2 s.o so the pairwise table is one
    matmul instead of a broadcast over a 4-D temporary; the sweep runs every
    control step, so this is the planner's hot path.
    """
    if obstacles.shape[0] == 0:
        return np.full(pts.shape[0], np.inf)
    a, k, _ = pts.shape
    flat = pts.reshape(a * k, 2)
    d2 = (
        (flat * flat).sum(axis=1)[:, None]
        + (obstacles * obstacles).sum(axis=1)[None, :]
        - 2.0 * (flat @ obstacles.T)
    )
    d2_min = d2.min(axis=1).reshape(a, k).min(axis=1)
    return np.sqrt(np.maximum(d2_min, 0.0))


def rollout_local(
    state: "SimState",
    scan: Sequence[Vec2] | np.ndarray,
    local_goal: Vec2,
    limits: MotionLimits,
    nav: NavParams = NavParams(),
) -> VelocityCommand:
    """One step of the trajectory-rollout local planner.

    Scan points and the local goal are in the robot frame. Samples the
    (v, w) grid reachable within one control period, keeps arcs whose
    forward sweep stays at least robot_radius + margin from every scan
    point, and returns the best by progress + clearance score. With the
    goal behind the robot it first tries a pure turn toward it; with
    nothing safe it returns the maximal-deceleration command.
    """
    r = nav.rollout
    v0, w0 = state.robot_vel
    T = nav.control_period
    v_lo = max(0.0, v0 - limits.a_max * T)
    v_hi = min(limits.v_max, v0 + limits.a_max * T)
    w_lo = max(-limits.w_max, w0 - limits.alpha_max * T)
    w_hi = min(limits.w_max, w0 + limits.alpha_max * T)

    if isinstance(scan, np.ndarray):
        obstacles = scan.reshape(-1, 2).astype(float)
    else:
        obstacles = np.array([(p.x, p.y) for p in scan], dtype=float).reshape(-1, 2)
    if obstacles.shape[0] > 0:
        reach = v_hi * r.horizon + r.robot_radius + r.margin + 0.5
        near = np.hypot(obstacles[:, 0], obstacles[:, 1]) <= reach
        obstacles = obstacles[near]

    # Sample spacing along any arc is at most v_hi * horizon / (n_sweep - 1);
    # keeping it under the margin makes the discrete check conservative.
    n_sweep = max(2, int(math.ceil(r.horizon * max(v_hi, 1e-6) / r.margin)) + 1)
    ts = np.linspace(0.0, r.horizon, n_sweep)
    clear_threshold = r.robot_radius + r.margin

    goal_dist = local_goal.norm()
    bearing = math.atan2(local_goal.y, local_goal.x)
    if abs(bearing) > math.pi / 2 and goal_dist > 1e-6:
        # Goal behind: forward arcs cannot score positive progress, so turn
        # in place (decelerating) toward it, provided that sweep is safe too.
        w_rec = w_hi if bearing > 0 else w_lo
        v_rec = v_lo
        pts = _arc_points(np.array([v_rec]), np.array([w_rec]), ts)
        if _sweep_min_distance(pts, obstacles)[0] >= clear_threshold:
            return VelocityCommand(float(v_rec), float(w_rec))

    vs_axis = np.linspace(v_lo, v_hi, r.n_linear)
    ws_axis = np.linspace(w_lo, w_hi, r.n_angular)
    vs = np.tile(vs_axis, r.n_angular)
    ws = np.repeat(ws_axis, r.n_linear)

    pts = _arc_points(vs, ws, ts)
    d_min = _sweep_min_distance(pts, obstacles)
    safe = d_min >= clear_threshold
    if not safe.any():
        return _decel_command(v0, w0, limits, T)

    ends = pts[:, -1, :]
    end_dist = np.hypot(ends[:, 0] - local_goal.x, ends[:, 1] - local_goal.y)
    progress = goal_dist - end_dist
    clearance = np.minimum(d_min, r.clearance_cap)
    score = r.w_prog * progress + r.w_clear * clearance

    best = -1
    for i in range(len(vs)):
        if not safe[i]:
            continue
        if best < 0:
            best = i
            continue
        if score[i] > score[best] or (
            score[i] == score[best] and abs(ws[i]) < abs(ws[best])
        ):
            best = i
    return VelocityCommand(float(vs[best]), float(ws[best]))


def select_lead_human(
    state: "SimState",
    visible_humans: Sequence["HumanState"],
    nav: NavParams = NavParams(),
) -> int | None:
    """Index of the nearest visible human in the forward cone, or None.

    The cone is +/- lead_cone radians about the robot heading, capped at
    lead_range meters. Ties go to the lower index.
    """
    best: int | None = None
    best_d = math.inf
    for i, h in enumerate(visible_humans):
        rel = transform_to_frame(h.position, state.robot_pose)
        d = rel.norm()
        if d > nav.lead_range:
            continue
        if abs(math.atan2(rel.y, rel.x)) > nav.lead_cone:
            continue
        if d < best_d:
            best, best_d = i, d
    return best


def execute_action(
    action: DiscreteAction | int,
    state: "SimState",
    plan: GlobalPlan,
    visible_humans: Sequence["HumanState"],
    scan: Sequence[Vec2] | np.ndarray,
    limits: MotionLimits,
    nav: NavParams = NavParams(),
) -> VelocityCommand:
    """Map a discrete action to a velocity command via the local planner.

    Halt decelerates maximally. GoAlone heads for the next plan waypoint.
    Follow targets a point follow_gap behind the lead human and caps
    speed at the lead's speed. Pass targets a point offset to the left of
    the lead's constant-velocity predicted position. Follow and Pass
    degrade to GoAlone when no lead human qualifies.
    """
    action = DiscreteAction(action)
    v0, w0 = state.robot_vel
    pose = state.robot_pose

    if action == DiscreteAction.HALT:
        return _decel_command(v0, w0, limits, nav.control_period)

    if action in (DiscreteAction.FOLLOW, DiscreteAction.PASS):
        lead_i = select_lead_human(state, visible_humans, nav)
        if lead_i is None:
            action = DiscreteAction.GO_ALONE

    if action == DiscreteAction.GO_ALONE:
        target = plan.current_target(pose.position, nav.waypoint_reach)
        return rollout_local(state, scan, transform_to_frame(target, pose), limits, nav)

    lead = visible_humans[lead_i]
    if action == DiscreteAction.FOLLOW:
        speed = lead.velocity.norm()
        if speed > 0.05:
            behind = lead.position - lead.velocity * (nav.follow_gap / speed)
        else:
            toward_robot = pose.position - lead.position
            d = toward_robot.norm()
            if d < 1e-9:
                behind = pose.position
            else:
                behind = lead.position + toward_robot * (nav.follow_gap / d)
        cmd = rollout_local(state, scan, transform_to_frame(behind, pose), limits, nav)
        if cmd.linear > speed:
            # Scale both components so the capped command keeps its curvature.
            factor = speed / cmd.linear if cmd.linear > 0 else 0.0
            cmd = VelocityCommand(speed, cmd.angular * factor)
        return cmd

    # Pass: aim past the lead's predicted position, offset to its left in
    # the robot frame.
    predicted = lead.position + lead.velocity * nav.pass_prediction
    local = transform_to_frame(predicted, pose)
    target = Vec2(local.x, local.y + nav.pass_offset)
    return rollout_local(state, scan, target, limits, nav)
