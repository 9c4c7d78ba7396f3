"""Simulation state and transition: kinematics, collisions, scan, observation.

One environment step applies a velocity command for an action period
(0.2 s) made of fixed 0.05 s substeps. Within each substep the robot's
velocity slews toward the command under acceleration limits, humans
advance from the robot's pre-substep position, and the robot pose
integrates the applied twist along its exact circular arc. Velocity
noise, when enabled, perturbs only the applied twist: the state keeps
the noiseless velocity so seeded runs stay reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geom import (
    Pose2,
    Vec2,
    heading_to_vector,
    point_segment_distance_batch,
    ray_circle_intersect_batch,
    ray_segment_intersect_batch,
    rotate,
    segments_cross_batch,
    transform_to_frame,
)
from .humans import HumanState, SocialForceParams, step_humans
from .nav import MotionLimits
from .world import AGENT_RADIUS, WorldMap

__all__ = [
    "SUBSTEP_DT",
    "ROBOT_RADIUS",
    "MotionLimits",
    "ScanConfig",
    "SimState",
    "detect_collisions",
    "observe",
    "obs_dim",
    "scan_to_points",
    "simulate_scan",
    "step_env",
    "visible_humans",
]

SUBSTEP_DT = 0.05
ROBOT_RADIUS = 0.3


@dataclass(frozen=True, slots=True)
class ScanConfig:
    """Planar range scanner: ray count, field of view, range clip."""

    rays: int = 360
    fov_deg: float = 360.0
    max_range: float = 10.0

    def __post_init__(self) -> None:
        if self.rays < 1:
            raise ValueError("rays must be >= 1")
        if not 0.0 < self.fov_deg <= 360.0:
            raise ValueError("fov_deg must be in (0, 360]")
        if self.max_range <= 0.0:
            raise ValueError("max_range must be positive")


@dataclass(frozen=True, slots=True)
class SimState:
    """Full simulation state; immutable, stepping returns a new one.

    The rng object is shared across successive states of one episode and
    is consumed only when velocity noise is enabled.
    """

    robot_pose: Pose2
    robot_vel: tuple[float, float]
    goal: Pose2
    humans: tuple[HumanState, ...]
    t: float
    rng: np.random.Generator


def obs_dim(h_cap: int) -> int:
    return 6 + 4 * h_cap


def _approach(current: float, target: float, max_delta: float) -> float:
    lo, hi = current - max_delta, current + max_delta
    return min(max(target, lo), hi)


def _integrate_twist(pose: Pose2, v: float, w: float, dt: float) -> Pose2:
    """Advance a pose along its exact constant-twist circular arc."""
    theta = pose.heading
    if abs(w) < 1e-12:
        return Pose2(
            Vec2(
                pose.position.x + v * np.cos(theta) * dt,
                pose.position.y + v * np.sin(theta) * dt,
            ),
            theta,
        )
    radius = v / w
    theta1 = theta + w * dt
    return Pose2(
        Vec2(
            pose.position.x + radius * (np.sin(theta1) - np.sin(theta)),
            pose.position.y - radius * (np.cos(theta1) - np.cos(theta)),
        ),
        theta1,
    )


def step_env(
    state: SimState,
    cmd,
    dt_action: float,
    limits: MotionLimits,
    world: WorldMap,
    sf_params: SocialForceParams = SocialForceParams(),
    substep: float = SUBSTEP_DT,
) -> SimState:
    """Apply one velocity command for dt_action seconds of simulation.

    dt_action must be a positive multiple of the substep. Humans are
    advanced before the robot within each substep so both react to the
    same snapshot.
    """
    n = round(dt_action / substep)
    if n < 1 or abs(n * substep - dt_action) > 1e-9:
        raise ValueError(
            f"dt_action {dt_action} is not a positive multiple of the {substep} s substep"
        )

    noisy = state.rng is not None and max(limits.noise_std) > 0.0
    pose = state.robot_pose
    v, w = state.robot_vel
    humans = state.humans
    walls = world.walls_array
    for _ in range(n):
        v = _approach(v, cmd.linear, limits.a_max * substep)
        w = _approach(w, cmd.angular, limits.alpha_max * substep)
        v = min(max(v, -limits.v_max), limits.v_max)
        w = min(max(w, -limits.w_max), limits.w_max)
        v_applied, w_applied = v, w
        if noisy:
            v_applied += float(state.rng.normal(0.0, limits.noise_std[0]))
            w_applied += float(state.rng.normal(0.0, limits.noise_std[1]))
        if humans:
            humans = step_humans(
                humans, (pose.position, ROBOT_RADIUS), walls, sf_params, substep
            )
        pose = _integrate_twist(pose, v_applied, w_applied, substep)

    return replace(
        state,
        robot_pose=pose,
        robot_vel=(v, w),
        humans=humans,
        t=state.t + n * substep,
    )


def detect_collisions(state: SimState, world: WorldMap) -> tuple[int, int]:
    """Counts of humans and walls currently in contact with the robot."""
    p = state.robot_pose.position
    human_hits = sum(
        1 for h in state.humans if p.dist(h.position) < ROBOT_RADIUS + AGENT_RADIUS
    )
    wall_hits = 0
    walls = world.walls_array
    if walls.shape[0] > 0:
        d = point_segment_distance_batch(np.array([[p.x, p.y]]), walls)
        wall_hits = int((d[0] < ROBOT_RADIUS).sum())
    return human_hits, wall_hits


_RAY_CACHE: dict[tuple[int, float], tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _ray_angles(cfg: ScanConfig) -> np.ndarray:
    """Ray bearings in the robot frame."""
    if abs(cfg.fov_deg - 360.0) < 1e-9:
        # Full circle: spacing 2*pi/rays without a duplicate closing ray.
        return -np.pi + 2.0 * np.pi * np.arange(cfg.rays) / cfg.rays
    if cfg.rays == 1:
        return np.zeros(1)
    half = np.radians(cfg.fov_deg) / 2.0
    return np.linspace(-half, half, cfg.rays)


def _ray_basis(cfg: ScanConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(angles, cos, sin) for a scan config, cached; scans run per step."""
    key = (cfg.rays, cfg.fov_deg)
    basis = _RAY_CACHE.get(key)
    if basis is None:
        angles = _ray_angles(cfg)
        basis = (angles, np.cos(angles), np.sin(angles))
        _RAY_CACHE[key] = basis
    return basis


def simulate_scan(state: SimState, world: WorldMap, cfg: ScanConfig) -> np.ndarray:
    """Range scan, shape (rays, 2) of (bearing rad, range m).

    Each ray reports the nearest wall or human-disc hit, clipped at
    max_range; bearings are in the robot frame.
    """
    angles, cos_a, sin_a = _ray_basis(cfg)
    origin = np.array(
        [state.robot_pose.position.x, state.robot_pose.position.y]
    )
    # Rotate the cached unit rays by the heading instead of re-running trig.
    ch = math.cos(state.robot_pose.heading)
    sh = math.sin(state.robot_pose.heading)
    dirs = np.stack([cos_a * ch - sin_a * sh, sin_a * ch + cos_a * sh], axis=1)

    ranges = ray_segment_intersect_batch(origin, dirs, world.walls_array)
    if state.humans:
        centers = np.array([(h.position.x, h.position.y) for h in state.humans])
        human_t = ray_circle_intersect_batch(origin, dirs, centers, AGENT_RADIUS)
        ranges = np.minimum(ranges, human_t)
    ranges = np.minimum(ranges, cfg.max_range)
    return np.stack([angles, ranges], axis=1)


def scan_to_points(scan: np.ndarray, max_range: float) -> np.ndarray:
    """Robot-frame obstacle points from a scan, dropping max-range returns."""
    hit = scan[:, 1] < max_range - 1e-9
    angles, ranges = scan[hit, 0], scan[hit, 1]
    return np.stack([ranges * np.cos(angles), ranges * np.sin(angles)], axis=1)


def _visibility_mask(state: SimState, world: WorldMap) -> np.ndarray:
    """True per human when no wall crosses the robot-to-human sight line."""
    if not state.humans:
        return np.zeros(0, dtype=bool)
    p = state.robot_pose.position
    targets = np.array([(h.position.x, h.position.y) for h in state.humans])
    if world.walls_array.shape[0] == 0:
        return np.ones(len(state.humans), dtype=bool)
    blocked = segments_cross_batch(np.array([p.x, p.y]), targets, world.walls_array)
    return ~blocked


def visible_humans(state: SimState, world: WorldMap) -> list[HumanState]:
    mask = _visibility_mask(state, world)
    return [h for h, m in zip(state.humans, mask) if m]


def observe(
    state: SimState, world: WorldMap, local_goal: Vec2, h_cap: int
) -> np.ndarray:
    """Observation vector of length 6 + 4*h_cap.

    Layout: goal (robot frame), local goal (robot frame), robot linear
    and angular velocity, then h_cap human slots of (rel position,
    rel velocity in the robot frame), nearest visible human first.
    Occluded and absent humans leave their slot at exactly zero.
    """
    pose = state.robot_pose
    goal_l = transform_to_frame(state.goal.position, pose)
    local_l = transform_to_frame(local_goal, pose)
    out = np.zeros(obs_dim(h_cap))
    out[0], out[1] = goal_l.x, goal_l.y
    out[2], out[3] = local_l.x, local_l.y
    out[4], out[5] = state.robot_vel

    mask = _visibility_mask(state, world)
    robot_v_world = heading_to_vector(pose.heading) * state.robot_vel[0]
    visible = [
        (pose.position.dist(h.position), i, h)
        for i, h in enumerate(state.humans)
        if mask[i]
    ]
    visible.sort(key=lambda item: (item[0], item[1]))
    for slot, (_, _, h) in enumerate(visible[:h_cap]):
        rel_p = transform_to_frame(h.position, pose)
        rel_v = rotate(h.velocity - robot_v_world, -pose.heading)
        base = 6 + 4 * slot
        out[base : base + 4] = (rel_p.x, rel_p.y, rel_v.x, rel_v.y)
    return out
