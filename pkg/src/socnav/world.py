"""Static maps, the navigation pose graph, and scenario generation.

A map is a set of wall segments plus a graph of poses the planner can
route through. A subset of graph nodes ("legal poses") is where robots
and humans may start or be sent. Scenarios (robot start/goal plus human
start/goal pairs) are drawn uniformly from the legal poses with a
no-overlap constraint at spawn.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING, Iterator

import numpy as np

from .geom import Pose2, Segment, Vec2, segments_cross, segments_to_array

if TYPE_CHECKING:
    from .env import SimState

MAP_FORMAT_VERSION = 1

# Agents (robot and humans) are 0.3 m discs; two starts closer than one
# diameter would spawn in collision.
AGENT_RADIUS = 0.3

BUILTIN_MAPS = ("training", "transfer")


class ConfigError(Exception):
    """Raised for invalid configuration files or unsatisfiable settings."""


class Terminal(enum.Enum):
    RUNNING = "running"
    SUCCESS = "success"
    FAILURE = "failure"


@dataclass(frozen=True)
class WorldMap:
    """Immutable map: walls plus the navigation graph.

    nav_edges hold (i, j, cost) with cost in meters; edges are treated as
    bidirectional by the planner.
    """

    name: str
    segments: tuple[Segment, ...]
    nav_nodes: tuple[Pose2, ...]
    nav_edges: tuple[tuple[int, int, float], ...]
    legal_pose_indices: tuple[int, ...]

    @cached_property
    def walls_array(self) -> np.ndarray:
        """Walls packed as an (M, 4) array for the batch geometry helpers."""
        return segments_to_array(list(self.segments))

    @property
    def legal_poses(self) -> tuple[Pose2, ...]:
        return tuple(self.nav_nodes[i] for i in self.legal_pose_indices)


@dataclass(frozen=True)
class ScenarioConfig:
    """Knobs for scenario generation and episode termination."""

    world: WorldMap
    h_min: int = 3
    h_max: int = 5
    n_repeat: int = 1
    n_max_iters: int = 100
    eps_success: float = 0.5
    t_fail: float = 40.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0 <= self.h_min <= self.h_max):
            raise ConfigError(f"need 0 <= h_min <= h_max, got {self.h_min}, {self.h_max}")
        if self.eps_success <= 0:
            raise ConfigError("eps_success must be > 0")
        if self.t_fail <= 0:
            raise ConfigError("t_fail must be > 0")
        if self.n_repeat < 1 or self.n_max_iters < 1:
            raise ConfigError("n_repeat and n_max_iters must be >= 1")


@dataclass(frozen=True)
class Scenario:
    """One episode's initial conditions."""

    world: WorldMap
    robot_start: Pose2
    robot_goal: Pose2
    humans: tuple[tuple[Pose2, Pose2], ...]  # (start, goal) pairs


def scenario_hash(s: Scenario) -> str:
    """Stable short fingerprint of a scenario's content."""
    parts = [s.world.name]
    for pose in (s.robot_start, s.robot_goal):
        parts.append(f"{pose.position.x!r},{pose.position.y!r},{pose.heading!r}")
    for start, goal in s.humans:
        for pose in (start, goal):
            parts.append(f"{pose.position.x!r},{pose.position.y!r},{pose.heading!r}")
    return hashlib.sha256("|".join(parts).encode()).hexdigest()[:16]


def generate_scenario(
    cfg: ScenarioConfig,
    rng: np.random.Generator,
    agent_radius: float = AGENT_RADIUS,
) -> Scenario:
    """Draw one scenario uniformly from the map's legal poses.

    Robot start and goal are distinct legal poses; each human gets a
    start that keeps at least 2*agent_radius from every already-occupied
    start (robot included) and a goal distinct from its own start.
    Deterministic given the generator state.

    Raises ConfigError when the legal pose set is too small to place
    h_max humans without overlap.
    """
    poses = cfg.world.legal_poses
    if len(poses) < cfg.h_max + 2:
        raise ConfigError(
            f"map {cfg.world.name!r} has {len(poses)} legal poses; "
            f"need at least h_max + 2 = {cfg.h_max + 2}"
        )

    def draw() -> int:
        return int(rng.integers(0, len(poses)))

    start_i = draw()
    goal_i = draw()
    attempts = 0
    while goal_i == start_i:
        goal_i = draw()
        attempts += 1
        if attempts > 1000:
            raise ConfigError("could not draw a robot goal distinct from its start")

    n = int(rng.integers(cfg.h_min, cfg.h_max + 1))
    occupied = [poses[start_i].position]
    humans: list[tuple[Pose2, Pose2]] = []
    for _ in range(n):
        placed = False
        for _ in range(100 * len(poses)):
            si = draw()
            pos = poses[si].position
            if all(pos.dist(o) >= 2 * agent_radius for o in occupied):
                gi = draw()
                tries = 0
                while gi == si:
                    gi = draw()
                    tries += 1
                    if tries > 1000:
                        break
                if gi == si:
                    continue
                occupied.append(pos)
                humans.append((poses[si], poses[gi]))
                placed = True
                break
        if not placed:
            raise ConfigError(
                f"could not place {cfg.h_max} humans without overlap on map "
                f"{cfg.world.name!r}"
            )

    return Scenario(
        world=cfg.world,
        robot_start=poses[start_i],
        robot_goal=poses[goal_i],
        humans=tuple(humans),
    )


def scenario_schedule(cfg: ScenarioConfig) -> Iterator[tuple[Scenario, int]]:
    """Lazily yield (scenario, repeat_index), n_repeat episodes per
    scenario, exactly n_max_iters episodes in total."""
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    emitted = 0
    while emitted < cfg.n_max_iters:
        scenario = generate_scenario(cfg, rng)
        for r in range(cfg.n_repeat):
            if emitted >= cfg.n_max_iters:
                return
            yield scenario, r
            emitted += 1


def check_terminal(state: "SimState", cfg: ScenarioConfig) -> Terminal:
    """Success when the robot is within eps_success of the goal position,
    failure when the clock reaches t_fail first.

    The timeout is inclusive up to float accumulation noise so that an
    episode of exactly t_fail / dt steps fails on its last step.
    """
    d = state.robot_pose.position.dist(state.goal.position)
    if d < cfg.eps_success:
        return Terminal.SUCCESS
    if state.t > cfg.t_fail - 1e-9:
        return Terminal.FAILURE
    return Terminal.RUNNING


# ---------------------------------------------------------------------------
# Map file I/O and validation
# ---------------------------------------------------------------------------


def world_to_dict(world: WorldMap) -> dict:
    return {
        "format_version": MAP_FORMAT_VERSION,
        "name": world.name,
        "segments": [[s.a.x, s.a.y, s.b.x, s.b.y] for s in world.segments],
        "nav_nodes": [[p.position.x, p.position.y, p.heading] for p in world.nav_nodes],
        "nav_edges": [[i, j] for i, j, _ in world.nav_edges],
        "legal_pose_indices": list(world.legal_pose_indices),
    }


def world_from_dict(data: dict) -> WorldMap:
    version = data.get("format_version")
    if version != MAP_FORMAT_VERSION:
        raise ConfigError(f"unsupported map format_version {version!r}")
    try:
        name = data["name"]
        segments = tuple(
            Segment(Vec2(x1, y1), Vec2(x2, y2)) for x1, y1, x2, y2 in data["segments"]
        )
        nodes = tuple(Pose2(Vec2(x, y), th) for x, y, th in data["nav_nodes"])
        edges = []
        for i, j in data["nav_edges"]:
            if not (0 <= i < len(nodes) and 0 <= j < len(nodes)):
                raise ConfigError(f"nav edge ({i},{j}) references a missing node")
            cost = nodes[i].position.dist(nodes[j].position)
            edges.append((int(i), int(j), cost))
        legal = tuple(int(i) for i in data["legal_pose_indices"])
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed map document: {exc}") from exc
    for i in legal:
        if not 0 <= i < len(nodes):
            raise ConfigError(f"legal pose index {i} out of range")
    return WorldMap(
        name=name,
        segments=segments,
        nav_nodes=nodes,
        nav_edges=tuple(edges),
        legal_pose_indices=legal,
    )


def load_map(path_or_name: str | Path) -> WorldMap:
    """Load a map JSON file; bare builtin names resolve to packaged maps."""
    p = Path(path_or_name)
    if not p.exists() and str(path_or_name) in BUILTIN_MAPS:
        ref = resources.files("socnav").joinpath(f"maps/{path_or_name}.json")
        data = json.loads(ref.read_text(encoding="utf-8"))
        return world_from_dict(data)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read map file {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"map file {p} is not valid JSON: {exc}") from exc
    return world_from_dict(data)


def save_map(world: WorldMap, path: str | Path) -> None:
    Path(path).write_text(json.dumps(world_to_dict(world), indent=2) + "\n", encoding="utf-8")


def validate_world(world: WorldMap) -> list[str]:
    """Check the WorldMap invariants; returns human-readable problems."""
    problems: list[str] = []
    n = len(world.nav_nodes)
    adjacency: dict[int, set[int]] = {i: set() for i in range(n)}
    for i, j, cost in world.nav_edges:
        if not (0 <= i < n and 0 <= j < n):
            problems.append(f"edge ({i},{j}) references a missing node")
            continue
        if cost <= 0:
            problems.append(f"edge ({i},{j}) has non-positive cost {cost}")
        a = world.nav_nodes[i].position
        b = world.nav_nodes[j].position
        for w_idx, wall in enumerate(world.segments):
            if segments_cross(a, b, wall):
                problems.append(f"edge ({i},{j}) crosses wall segment {w_idx}")
                break
        adjacency[i].add(j)
        adjacency[j].add(i)

    for i in world.legal_pose_indices:
        if not 0 <= i < n:
            problems.append(f"legal pose index {i} out of range")

    legal = [i for i in world.legal_pose_indices if 0 <= i < n]
    if len(legal) >= 2:
        seen = {legal[0]}
        frontier = [legal[0]]
        while frontier:
            cur = frontier.pop()
            for nxt in adjacency[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        unreachable = [i for i in legal if i not in seen]
        if unreachable:
            problems.append(
                f"legal poses {unreachable} unreachable from legal pose {legal[0]}"
            )
    return problems
