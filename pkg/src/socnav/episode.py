"""Episode loop: social metrics, reward, termination, and step logging.

EpisodeRunner owns one episode end to end and is the single code path
behind both in-process runs and the wire-protocol server, which keeps
their step logs byte-identical. Force and blame both use the decaying
kernel exp(-d): force against the robot's current position, blame
against the segment swept by one second of the robot's velocity, so
blame >= force always (a segment can only be closer than its endpoint).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

import numpy as np

from .env import (
    SimState,
    detect_collisions,
    observe,
    scan_to_points,
    simulate_scan,
    step_env,
    visible_humans,
)
from .geom import Segment, Vec2, heading_to_vector, point_segment_distance
from .humans import HumanState
from .nav import DiscreteAction, execute_action, plan_global
from .world import Scenario, Terminal, check_terminal, scenario_hash

if TYPE_CHECKING:
    from .config import SimConfig


class AgentProtocolError(Exception):
    """The agent broke the action contract (bad type or out of range)."""


@dataclass(frozen=True, slots=True)
class RewardWeights:
    """r = w1*d_g + w2*force + w3*blame, plus c on reaching the goal."""

    w1: float = 1.0
    w2: float = -0.3
    w3: float = -0.3
    c: float = 10.0
    gamma: float = 0.99

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must be in (0, 1]")


@dataclass(frozen=True, slots=True)
class StepMetrics:
    d_g: float               # goal progress this step, meters
    force: float
    blame: float
    dist_step: float         # path length this step, meters
    human_collisions: int
    wall_collisions: int


@dataclass(frozen=True, slots=True)
class StepOutcome:
    obs: np.ndarray          # observation after the step (o_{t+1})
    reward: float
    done: bool
    outcome: Terminal
    metrics: StepMetrics
    log_line: dict


@dataclass(frozen=True, slots=True)
class EpisodeRecord:
    scenario_id: str
    outcome: Terminal
    time_to_goal: float | None       # None unless the goal was reached
    distance_traveled: float
    final_distance_from_goal: float
    max_force: float
    max_blame: float
    human_collisions: int
    wall_collisions: int
    discounted_return: float
    n_steps: int
    steps: tuple[dict, ...]

    @property
    def collisions(self) -> int:
        return self.human_collisions + self.wall_collisions

    @property
    def clean_success(self) -> bool:
        """Reached the goal without touching anything."""
        return self.outcome is Terminal.SUCCESS and self.collisions == 0


def compute_force(state: SimState) -> float:
    """Proximity cost: max over humans of exp(-distance); 0 with no humans."""
    if not state.humans:
        return 0.0
    p = state.robot_pose.position
    return max(math.exp(-p.dist(h.position)) for h in state.humans)


def compute_blame(state: SimState) -> float:
    """Like force, but against one second of lookahead travel.

    The kernel distance is from each human to the segment from p_r to
    p_r + v_r * 1 s; with zero velocity this degenerates to the force.
    """
    if not state.humans:
        return 0.0
    p = state.robot_pose.position
    v = heading_to_vector(state.robot_pose.heading) * state.robot_vel[0]
    if v.norm() < 1e-12:
        return compute_force(state)
    seg = Segment(p, p + v)
    return max(
        math.exp(-point_segment_distance(h.position, seg)) for h in state.humans
    )


def reward_formula(
    d_g: float, force: float, blame: float, success: bool, w: RewardWeights
) -> float:
    """The step reward as a pure function of its three metrics."""
    return w.w1 * d_g + w.w2 * force + w.w3 * blame + (w.c if success else 0.0)


def compute_reward(
    prev: SimState,
    cur: SimState,
    terminal: Terminal,
    w: RewardWeights,
    world=None,
) -> tuple[float, StepMetrics]:
    """Reward and metrics for the transition prev -> cur.

    Collision counts need the map; without one they are reported as 0.
    """
    goal = cur.goal.position
    d_g = prev.robot_pose.position.dist(goal) - cur.robot_pose.position.dist(goal)
    force = compute_force(cur)
    blame = compute_blame(cur)
    reward = reward_formula(d_g, force, blame, terminal is Terminal.SUCCESS, w)
    if world is not None:
        humans_hit, walls_hit = detect_collisions(cur, world)
    else:
        humans_hit, walls_hit = 0, 0
    metrics = StepMetrics(
        d_g=d_g,
        force=force,
        blame=blame,
        dist_step=prev.robot_pose.position.dist(cur.robot_pose.position),
        human_collisions=humans_hit,
        wall_collisions=walls_hit,
    )
    return reward, metrics


def discounted_return(rewards: Iterable[float], gamma: float) -> float:
    """Sum of gamma^t * r_t in step order."""
    total = 0.0
    factor = 1.0
    for r in rewards:
        total += factor * r
        factor *= gamma
    return total


def canonical_json(obj) -> str:
    """Key-sorted, separator-free JSON; the byte-comparison format."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _human_plan(world, start, goal, connect_radius: float) -> tuple[Vec2, ...]:
    plan = plan_global(world, start, goal, connect_radius)
    return tuple(p.position for p in plan.waypoints)


class EpisodeRunner:
    """One episode's full loop: observe -> act -> simulate -> score.

    Construct, call reset() once for the first observation, then step()
    until done. The same runner instance must not be reused for another
    episode; build a fresh one per scenario.
    """

    def __init__(
        self,
        cfg: "SimConfig",
        scenario: Scenario,
        rng: np.random.Generator | None = None,
    ):
        self.cfg = cfg
        self.world = scenario.world
        self.scenario = scenario
        self._rng = rng if rng is not None else np.random.default_rng(cfg.scenario.seed)
        self.plan = plan_global(
            self.world, scenario.robot_start, scenario.robot_goal, cfg.nav.connect_radius
        )
        humans = []
        for start, goal in scenario.humans:
            waypoints = _human_plan(self.world, start, goal, cfg.nav.connect_radius)
            humans.append(
                HumanState(
                    position=start.position,
                    velocity=Vec2(0.0, 0.0),
                    waypoints=waypoints,
                    current_waypoint=min(1, len(waypoints) - 1),
                    goal=goal,
                )
            )
        self.state = SimState(
            robot_pose=scenario.robot_start,
            robot_vel=(0.0, 0.0),
            goal=scenario.robot_goal,
            humans=tuple(humans),
            t=0.0,
            rng=self._rng,
        )
        self.done = False
        self.outcome = Terminal.RUNNING
        self._obs: np.ndarray | None = None
        self._gamma_pow = 1.0
        self._return = 0.0
        self._dist = 0.0
        self._max_force = 0.0
        self._max_blame = 0.0
        self._human_hits = 0
        self._wall_hits = 0
        self._steps: list[dict] = []

    def reset(self) -> np.ndarray:
        self._obs = self._observe()
        return self._obs

    def _observe(self) -> np.ndarray:
        local = self.plan.current_target(
            self.state.robot_pose.position, self.cfg.nav.waypoint_reach
        )
        return observe(self.state, self.world, local, self.cfg.h_cap)

    def step(self, action) -> StepOutcome:
        if self._obs is None:
            raise AgentProtocolError("step before reset")
        if self.done:
            raise AgentProtocolError("step after episode end")
        try:
            numeric = float(action)
        except (TypeError, ValueError):
            raise AgentProtocolError(f"action out of range: {action!r}") from None
        if not numeric.is_integer() or not 0 <= numeric <= 3:
            raise AgentProtocolError(f"action out of range: {action!r}")
        act = DiscreteAction(int(numeric))

        cfg = self.cfg
        prev = self.state
        visible = visible_humans(prev, self.world)
        if act is DiscreteAction.HALT:
            scan_pts = np.zeros((0, 2))  # Halt never consults the scan
        else:
            scan = simulate_scan(prev, self.world, cfg.scan)
            scan_pts = scan_to_points(scan, cfg.scan.max_range)
        cmd = execute_action(
            act, prev, self.plan, visible, scan_pts, cfg.limits, cfg.nav
        )
        cur = step_env(
            prev, cmd, cfg.nav.control_period, cfg.limits, self.world, cfg.sf
        )
        terminal = check_terminal(cur, cfg.scenario)
        reward, metrics = compute_reward(prev, cur, terminal, cfg.rewards, self.world)

        self._return += self._gamma_pow * reward
        self._gamma_pow *= cfg.rewards.gamma
        self._dist += metrics.dist_step
        self._max_force = max(self._max_force, metrics.force)
        self._max_blame = max(self._max_blame, metrics.blame)
        self._human_hits += metrics.human_collisions
        self._wall_hits += metrics.wall_collisions

        log_line = {
            "t": prev.t,
            "action": int(act),
            "reward": reward,
            "d_g": metrics.d_g,
            "force": metrics.force,
            "blame": metrics.blame,
            "human_collisions": metrics.human_collisions,
            "wall_collisions": metrics.wall_collisions,
            "robot": [
                prev.robot_pose.position.x,
                prev.robot_pose.position.y,
                prev.robot_pose.heading,
            ],
            "obs": [float(x) for x in self._obs],
        }
        self._steps.append(log_line)

        self.state = cur
        self.done = terminal is not Terminal.RUNNING
        self.outcome = terminal
        self._obs = self._observe()
        return StepOutcome(
            obs=self._obs,
            reward=reward,
            done=self.done,
            outcome=terminal,
            metrics=metrics,
            log_line=log_line,
        )

    @property
    def record(self) -> EpisodeRecord:
        if not self.done:
            raise RuntimeError("episode still running")
        final_d = self.state.robot_pose.position.dist(self.state.goal.position)
        return EpisodeRecord(
            scenario_id=scenario_hash(self.scenario),
            outcome=self.outcome,
            time_to_goal=self.state.t if self.outcome is Terminal.SUCCESS else None,
            distance_traveled=self._dist,
            final_distance_from_goal=final_d,
            max_force=self._max_force,
            max_blame=self._max_blame,
            human_collisions=self._human_hits,
            wall_collisions=self._wall_hits,
            discounted_return=self._return,
            n_steps=len(self._steps),
            steps=tuple(self._steps),
        )


def run_episode(
    scenario: Scenario,
    agent,
    cfg: "SimConfig",
    rng: np.random.Generator | None = None,
) -> EpisodeRecord:
    """Run one closed-loop episode with the given action provider.

    The agent needs an act(obs, runner) method; an optional
    begin_episode() hook is called before the first observation is
    produced, letting stateful policies clear per-episode state.
    """
    runner = EpisodeRunner(cfg, scenario, rng=rng)
    begin = getattr(agent, "begin_episode", None)
    if begin is not None:
        begin()
    obs = runner.reset()
    while not runner.done:
        action = agent.act(obs, runner)
        out = runner.step(action)
        obs = out.obs
    return runner.record
