"""Pedestrian simulation.

Each human walks a waypoint plan between its start and goal and, on
reaching the end, turns around and walks back, repeating for the whole
episode. Locally the motion is social-force driven: the current waypoint
attracts, other agents (robot included) and walls repel with
exponential-decay magnitudes. Integration is explicit Euler with all
forces evaluated on the pre-step snapshot, so the update is synchronous
and order-independent.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .geom import (
    Pose2,
    Segment,
    Vec2,
    closest_point_on_segment,
    closest_point_on_segment_batch,
    segments_to_array,
)

# A human switches to its next waypoint when this close to the current one.
WAYPOINT_REACH = 0.5


class Direction(enum.Enum):
    OUTBOUND = "outbound"
    RETURNING = "returning"


@dataclass(frozen=True, slots=True)
class SocialForceParams:
    """Force-model constants. All strictly positive."""

    tau: float = 0.5          # velocity relaxation time, seconds
    v_desired: float = 1.0    # preferred walking speed, m/s
    A_agent: float = 2.0      # agent repulsion strength
    B_agent: float = 0.35     # agent repulsion range, meters
    A_wall: float = 3.0       # wall repulsion strength
    B_wall: float = 0.2       # wall repulsion range, meters
    agent_radius: float = 0.3
    v_h_max: float = 1.5      # hard speed cap, m/s

    def __post_init__(self) -> None:
        for name in self.__dataclass_fields__:
            if getattr(self, name) <= 0:
                raise ValueError(f"SocialForceParams.{name} must be > 0")


@dataclass(frozen=True, slots=True)
class HumanState:
    """One pedestrian: pose, velocity, and progress along its plan."""

    position: Vec2
    velocity: Vec2
    waypoints: tuple[Vec2, ...]
    current_waypoint: int
    goal: Pose2
    direction: Direction = Direction.OUTBOUND


def goal_force(h: HumanState, target: Vec2, params: SocialForceParams) -> Vec2:
    """Attraction toward a target: (v_desired * e_hat - v) / tau."""
    diff = target - h.position
    d = diff.norm()
    if d < 1e-9:
        desired = Vec2(0.0, 0.0)
    else:
        desired = diff * (params.v_desired / d)
    return (desired - h.velocity) * (1.0 / params.tau)


def repulsion_force(
    h: HumanState, other_pos: Vec2, other_radius: float, params: SocialForceParams
) -> Vec2:
    """Exponential repulsion from another agent, pointing at this human."""
    diff = h.position - other_pos
    d = diff.norm()
    r_ij = params.agent_radius + other_radius
    if d < 1e-9:
        n = Vec2(1.0, 0.0)  # coincident agents: deterministic fallback direction
        d = 0.0
    else:
        n = diff * (1.0 / d)
    return n * (params.A_agent * math.exp((r_ij - d) / params.B_agent))


def wall_force(h: HumanState, walls: list[Segment], params: SocialForceParams) -> Vec2:
    """Summed repulsion away from every wall's closest point."""
    fx = fy = 0.0
    for seg in walls:
        cp = closest_point_on_segment(h.position, seg)
        diff = h.position - cp
        d = diff.norm()
        if d < 1e-9:
            continue  # center exactly on the wall: direction undefined
        mag = params.A_wall * math.exp((params.agent_radius - d) / params.B_wall)
        fx += mag * diff.x / d
        fy += mag * diff.y / d
    return Vec2(fx, fy)


def _advance(idx: int, direction: Direction, n: int) -> tuple[int, Direction]:
    """One waypoint-index step, turning around at either end of the plan."""
    if direction is Direction.OUTBOUND:
        if idx >= n - 1:
            return (n - 2 if n > 1 else 0), Direction.RETURNING
        return idx + 1, direction
    if idx <= 0:
        return (1 if n > 1 else 0), Direction.OUTBOUND
    return idx - 1, direction


def step_humans(
    humans: list[HumanState],
    robot: tuple[Vec2, float] | None,
    walls: list[Segment] | np.ndarray,
    params: SocialForceParams,
    dt: float,
) -> list[HumanState]:
    """Advance every human by one explicit-Euler step of length dt.

    Args:
        humans: pre-step states; not mutated.
        robot: (position, radius) of the robot, repelling exactly like a
            human, or None for robot-free simulation.
        walls: wall segments, either as Segment objects or the packed
            (M, 4) array form.
        params: force constants.
        dt: step size in seconds, > 0.

    Returns:
        New states; velocities clamped to v_h_max, waypoint indices
        advanced within WAYPOINT_REACH, direction flipped at plan ends.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    n = len(humans)
    if n == 0:
        return []

    # Crowds are tiny (a handful of agents), so scalar accumulation beats
    # array dispatch here; this loop runs every substep of every episode.
    px = [h.position.x for h in humans]
    py = [h.position.y for h in humans]
    fx = [0.0] * n
    fy = [0.0] * n
    inv_tau = 1.0 / params.tau

    # Goal attraction toward each human's current waypoint.
    for i, h in enumerate(humans):
        desx = desy = 0.0
        if h.waypoints:
            target = h.waypoints[h.current_waypoint]
            dx = target.x - px[i]
            dy = target.y - py[i]
            d = math.hypot(dx, dy)
            if d >= 1e-9:
                scale = params.v_desired / d
                desx = dx * scale
                desy = dy * scale
        fx[i] += (desx - h.velocity.x) * inv_tau
        fy[i] += (desy - h.velocity.y) * inv_tau

    # Pairwise agent repulsion from the pre-step snapshot.
    two_r = 2 * params.agent_radius
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            dx = px[i] - px[j]
            dy = py[i] - py[j]
            d = math.hypot(dx, dy)
            mag = params.A_agent * math.exp((two_r - d) / params.B_agent)
            if d < 1e-9:
                fx[i] += mag  # coincident agents: deterministic (1, 0) push
            else:
                fx[i] += mag * (dx / d)
                fy[i] += mag * (dy / d)

    if robot is not None:
        robot_pos, robot_radius = robot
        r_ij = params.agent_radius + robot_radius
        for i in range(n):
            dx = px[i] - robot_pos.x
            dy = py[i] - robot_pos.y
            d = math.hypot(dx, dy)
            mag = params.A_agent * math.exp((r_ij - d) / params.B_agent)
            if d < 1e-9:
                fx[i] += mag
            else:
                fx[i] += mag * (dx / d)
                fy[i] += mag * (dy / d)

    segs = walls if isinstance(walls, np.ndarray) else segments_to_array(list(walls))
    if segs.shape[0] > 0:
        pos = np.array([px, py]).T
        cps = closest_point_on_segment_batch(pos, segs)
        wdiff = pos[:, None, :] - cps
        dists = np.sqrt(np.einsum("imk,imk->im", wdiff, wdiff))
        ok = dists >= 1e-9
        wmag = np.where(
            ok, params.A_wall * np.exp((params.agent_radius - dists) / params.B_wall), 0.0
        )
        safe = np.where(ok, dists, 1.0)
        wall_f = np.einsum("im,imk->ik", wmag / safe, wdiff)
        for i in range(n):
            fx[i] += float(wall_f[i, 0])
            fy[i] += float(wall_f[i, 1])

    out: list[HumanState] = []
    for i, h in enumerate(humans):
        nvx = h.velocity.x + fx[i] * dt
        nvy = h.velocity.y + fy[i] * dt
        speed = math.hypot(nvx, nvy)
        if speed > params.v_h_max:
            scale = params.v_h_max / speed
            nvx *= scale
            nvy *= scale
        p = Vec2(px[i] + nvx * dt, py[i] + nvy * dt)
        v = Vec2(nvx, nvy)
        idx, direction = h.current_waypoint, h.direction
        if h.waypoints and p.dist(h.waypoints[idx]) < WAYPOINT_REACH:
            idx, direction = _advance(idx, direction, len(h.waypoints))
        out.append(
            replace(h, position=p, velocity=v, current_waypoint=idx, direction=direction)
        )
    return out
