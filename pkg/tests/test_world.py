import dataclasses
import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from socnav.geom import Pose2, Vec2
from socnav.world import (
    AGENT_RADIUS,
    ConfigError,
    Scenario,
    ScenarioConfig,
    Terminal,
    WorldMap,
    check_terminal,
    generate_scenario,
    load_map,
    save_map,
    scenario_hash,
    scenario_schedule,
    validate_world,
    world_from_dict,
    world_to_dict,
)


@pytest.fixture(scope="module")
def training():
    return load_map("training")


@dataclasses.dataclass
class FakeState:
    robot_pose: Pose2
    goal: Pose2
    t: float


def _cfg(world, **kw):
    return ScenarioConfig(world=world, **kw)


def test_builtin_maps_load_and_validate():
    for name in ("training", "transfer"):
        world = load_map(name)
        assert world.name == name
        assert validate_world(world) == []
        assert len(world.legal_pose_indices) >= 7


def test_map_roundtrip(tmp_path, training):
    path = tmp_path / "m.json"
    save_map(training, path)
    again = load_map(path)
    assert world_to_dict(again) == world_to_dict(training)


def test_map_rejects_bad_version(training):
    doc = world_to_dict(training)
    doc["format_version"] = 99
    with pytest.raises(ConfigError):
        world_from_dict(doc)


def test_map_rejects_bad_edge_index(training):
    doc = world_to_dict(training)
    doc["nav_edges"].append([0, 999])
    with pytest.raises(ConfigError):
        world_from_dict(doc)


def test_validate_flags_wall_crossing_edge():
    world = world_from_dict(
        {
            "format_version": 1,
            "name": "bad",
            "segments": [[1, -1, 1, 1]],
            "nav_nodes": [[0, 0, 0], [2, 0, 0]],
            "nav_edges": [[0, 1]],
            "legal_pose_indices": [0, 1],
        }
    )
    problems = validate_world(world)
    assert any("crosses wall" in p for p in problems)


def test_validate_flags_disconnected_legal_poses():
    world = world_from_dict(
        {
            "format_version": 1,
            "name": "split",
            "segments": [],
            "nav_nodes": [[0, 0, 0], [1, 0, 0], [5, 5, 0]],
            "nav_edges": [[0, 1]],
            "legal_pose_indices": [0, 2],
        }
    )
    problems = validate_world(world)
    assert any("unreachable" in p for p in problems)


def test_scenario_human_count_range(training):
    cfg = _cfg(training, h_min=3, h_max=5)
    rng = np.random.default_rng(0)
    for _ in range(50):
        s = generate_scenario(cfg, rng)
        assert 3 <= len(s.humans) <= 5


def test_scenario_zero_humans(training):
    cfg = _cfg(training, h_min=0, h_max=0)
    s = generate_scenario(cfg, np.random.default_rng(1))
    assert s.humans == ()
    assert s.robot_start != s.robot_goal


def test_scenario_deterministic(training):
    cfg = _cfg(training)
    a = generate_scenario(cfg, np.random.default_rng(42))
    b = generate_scenario(cfg, np.random.default_rng(42))
    assert a == b
    assert scenario_hash(a) == scenario_hash(b)


def test_scenario_invariants_fuzz(training):
    cfg = _cfg(training, h_min=3, h_max=5)
    legal_positions = {(p.position.x, p.position.y) for p in training.legal_poses}
    for seed in range(10_000):
        s = generate_scenario(cfg, np.random.default_rng(seed))
        starts = [s.robot_start.position] + [h[0].position for h in s.humans]
        for i in range(len(starts)):
            for j in range(i + 1, len(starts)):
                assert starts[i].dist(starts[j]) >= 2 * AGENT_RADIUS
        for pose in [s.robot_start, s.robot_goal] + [p for pair in s.humans for p in pair]:
            assert (pose.position.x, pose.position.y) in legal_positions
        for start, goal in s.humans:
            assert start != goal


def test_human_count_histogram(training):
    cfg = _cfg(training, h_min=3, h_max=5)
    rng = np.random.default_rng(123)
    counts = {3: 0, 4: 0, 5: 0}
    n = 10_000
    for _ in range(n):
        counts[len(generate_scenario(cfg, rng).humans)] += 1
    for k in (3, 4, 5):
        assert counts[k] / n > 0.20


def test_generate_rejects_small_pose_set():
    world = world_from_dict(
        {
            "format_version": 1,
            "name": "tiny",
            "segments": [],
            "nav_nodes": [[0, 0, 0], [1, 0, 0], [2, 0, 0]],
            "nav_edges": [[0, 1], [1, 2]],
            "legal_pose_indices": [0, 1, 2],
        }
    )
    cfg = _cfg(world, h_min=5, h_max=5)
    with pytest.raises(ConfigError):
        generate_scenario(cfg, np.random.default_rng(0))


def test_generate_rejects_unplaceable_humans():
    # plenty of poses, but all packed inside one agent diameter
    nodes = [[0.05 * i, 0.0, 0.0] for i in range(8)]
    world = world_from_dict(
        {
            "format_version": 1,
            "name": "packed",
            "segments": [],
            "nav_nodes": nodes,
            "nav_edges": [[i, i + 1] for i in range(7)],
            "legal_pose_indices": list(range(8)),
        }
    )
    cfg = _cfg(world, h_min=2, h_max=2)
    with pytest.raises(ConfigError):
        generate_scenario(cfg, np.random.default_rng(0))


def test_schedule_repeat_and_truncate(training):
    cfg = _cfg(training, n_repeat=2, n_max_iters=5)
    items = list(scenario_schedule(cfg))
    assert len(items) == 5
    hashes = [scenario_hash(s) for s, _ in items]
    assert hashes[0] == hashes[1]
    assert hashes[2] == hashes[3]
    assert hashes[0] != hashes[2]
    assert hashes[4] not in (hashes[0], hashes[2])
    assert [r for _, r in items] == [0, 1, 0, 1, 0]


def test_schedule_distinct(training):
    cfg = _cfg(training, n_repeat=1, n_max_iters=3)
    items = list(scenario_schedule(cfg))
    assert len(items) == 3
    assert len({scenario_hash(s) for s, _ in items}) == 3


def test_schedule_single_scenario(training):
    cfg = _cfg(training, n_repeat=3, n_max_iters=3)
    items = list(scenario_schedule(cfg))
    assert len({scenario_hash(s) for s, _ in items}) == 1
    assert [r for _, r in items] == [0, 1, 2]


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=1000), st.integers(min_value=1, max_value=1000))
def test_schedule_emits_exactly_n_max(n_repeat, n_max):
    cfg = ScenarioConfig(
        world=load_map("training"), h_min=0, h_max=0, n_repeat=n_repeat, n_max_iters=n_max
    )
    assert sum(1 for _ in scenario_schedule(cfg)) == n_max


def test_schedule_same_seed_same_scenarios(training):
    cfg = _cfg(training, n_max_iters=10)
    a = [scenario_hash(s) for s, _ in scenario_schedule(cfg)]
    b = [scenario_hash(s) for s, _ in scenario_schedule(cfg)]
    assert a == b


def test_check_terminal(training):
    cfg = _cfg(training, eps_success=0.5, t_fail=30.0)
    goal = Pose2(Vec2(5, 5), 0.0)
    near = FakeState(Pose2(Vec2(5.3, 5), 0.0), goal, 1.0)
    far_late = FakeState(Pose2(Vec2(7, 5), 0.0), goal, 31.0)
    far_early = FakeState(Pose2(Vec2(7, 5), 0.0), goal, 5.0)
    assert check_terminal(near, cfg) == Terminal.SUCCESS
    assert check_terminal(far_late, cfg) == Terminal.FAILURE
    assert check_terminal(far_early, cfg) == Terminal.RUNNING
    # success wins over timeout
    near_late = FakeState(Pose2(Vec2(5.3, 5), 0.0), goal, 31.0)
    assert check_terminal(near_late, cfg) == Terminal.SUCCESS


def test_scenario_config_validation(training):
    with pytest.raises(ConfigError):
        ScenarioConfig(world=training, h_min=4, h_max=2)
    with pytest.raises(ConfigError):
        ScenarioConfig(world=training, eps_success=0.0)
    with pytest.raises(ConfigError):
        ScenarioConfig(world=training, t_fail=-1.0)
    with pytest.raises(ConfigError):
        ScenarioConfig(world=training, n_repeat=0)
