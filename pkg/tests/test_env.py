"""Transition, collision, scan, and observation tests.

Visibility is cross-checked against a sampling oracle that walks the
sight line and watches for side changes relative to each wall, a
deliberately different formulation from the segment-intersection math
in the implementation.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from socnav.env import (
    ROBOT_RADIUS,
    ScanConfig,
    SimState,
    detect_collisions,
    obs_dim,
    observe,
    scan_to_points,
    simulate_scan,
    step_env,
    visible_humans,
)
from socnav.geom import Pose2, Segment, Vec2
from socnav.humans import HumanState
from socnav.nav import MotionLimits, VelocityCommand
from socnav.world import WorldMap

LIMITS = MotionLimits()


def _world(walls: list[Segment] = ()) -> WorldMap:
    return WorldMap(
        name="test",
        segments=tuple(walls),
        nav_nodes=(Pose2(Vec2(0, 0), 0.0),),
        nav_edges=(),
        legal_pose_indices=(0,),
    )


def _human(x, y, vx=0.0, vy=0.0) -> HumanState:
    return HumanState(
        position=Vec2(x, y),
        velocity=Vec2(vx, vy),
        waypoints=(Vec2(x, y),),
        current_waypoint=0,
        goal=Pose2(Vec2(x, y), 0.0),
    )


def _state(
    x=0.0,
    y=0.0,
    theta=0.0,
    vel=(0.0, 0.0),
    humans=(),
    goal=(10.0, 0.0),
    seed=0,
) -> SimState:
    return SimState(
        robot_pose=Pose2(Vec2(x, y), theta),
        robot_vel=vel,
        goal=Pose2(Vec2(*goal), 0.0),
        humans=tuple(humans),
        t=0.0,
        rng=np.random.default_rng(seed),
    )


# ------------------------------------------------------------------- step_env


def test_straight_drive_advances_exactly():
    s0 = _state(vel=(1.0, 0.0))
    s1 = step_env(s0, VelocityCommand(1.0, 0.0), 0.2, LIMITS, _world())
    assert s1.robot_pose.position.x == pytest.approx(0.2, abs=1e-12)
    assert s1.robot_pose.position.y == 0.0
    assert s1.t == pytest.approx(0.2)


def test_constant_twist_matches_closed_form_arc():
    v, w = 0.8, 0.9
    start = Pose2(Vec2(1.0, 2.0), 0.3)
    s0 = SimState(
        robot_pose=start,
        robot_vel=(v, w),
        goal=Pose2(Vec2(10, 0), 0.0),
        humans=(),
        t=0.0,
        rng=np.random.default_rng(0),
    )
    s1 = step_env(s0, VelocityCommand(v, w), 0.2, LIMITS, _world())
    radius = v / w
    theta1 = 0.3 + w * 0.2
    expect_x = 1.0 + radius * (math.sin(theta1) - math.sin(0.3))
    expect_y = 2.0 - radius * (math.cos(theta1) - math.cos(0.3))
    assert s1.robot_pose.position.x == pytest.approx(expect_x, abs=1e-9)
    assert s1.robot_pose.position.y == pytest.approx(expect_y, abs=1e-9)
    assert s1.robot_pose.heading == pytest.approx(theta1, abs=1e-9)


def test_pure_rotation_holds_position():
    # Spinning at pi rad/s needs a wider angular envelope than the default.
    wide = MotionLimits(w_max=4.0)
    s0 = _state(x=3.0, y=-2.0, vel=(0.0, math.pi))
    s1 = step_env(s0, VelocityCommand(0.0, math.pi), 1.0, wide, _world())
    assert s1.robot_pose.position == Vec2(3.0, -2.0)  # bitwise: zero radius
    assert abs(abs(s1.robot_pose.heading) - math.pi) < 1e-9


def test_acceleration_limited_spin_up():
    s1 = step_env(_state(), VelocityCommand(1.0, 0.0), 0.2, LIMITS, _world())
    # Four substeps gaining a_max * 0.05 = 0.1 m/s each.
    assert s1.robot_vel[0] == pytest.approx(0.4)
    # Distance is the sum of the post-increment speeds times the substep.
    assert s1.robot_pose.position.x == pytest.approx(0.05, abs=1e-12)


def test_dt_must_be_substep_multiple():
    with pytest.raises(ValueError):
        step_env(_state(), VelocityCommand(0, 0), 0.07, LIMITS, _world())
    with pytest.raises(ValueError):
        step_env(_state(), VelocityCommand(0, 0), 0.0, LIMITS, _world())


def test_velocity_limits_hold_under_fuzz():
    rng = np.random.default_rng(5)
    state = _state()
    world = _world()
    for _ in range(500):
        cmd = VelocityCommand(
            float(rng.uniform(-2 * LIMITS.v_max, 2 * LIMITS.v_max)),
            float(rng.uniform(-2 * LIMITS.w_max, 2 * LIMITS.w_max)),
        )
        state = step_env(state, cmd, 0.2, LIMITS, world)
        assert abs(state.robot_vel[0]) <= LIMITS.v_max + 1e-12
        assert abs(state.robot_vel[1]) <= LIMITS.w_max + 1e-12


def test_noise_free_runs_are_bit_identical():
    world = _world([Segment(Vec2(-5, 5), Vec2(5, 5))])
    cmds = [
        VelocityCommand(0.1 * (i % 10), 0.3 * ((i % 7) - 3)) for i in range(1000)
    ]

    def run():
        s = _state(vel=(0.5, 0.0), humans=[_human(2, 2), _human(-1, 3, 0.3, 0.0)])
        trace = []
        for cmd in cmds:
            s = step_env(s, cmd, 0.2, LIMITS, world)
            trace.append(
                (s.robot_pose.position.x, s.robot_pose.position.y, s.robot_pose.heading)
            )
        return trace, s

    trace_a, end_a = run()
    trace_b, end_b = run()
    assert trace_a == trace_b  # exact float equality, all 1000 steps
    assert end_a.humans == end_b.humans


def test_noise_perturbs_position_not_tracked_velocity():
    noisy = MotionLimits(noise_std=(0.1, 0.1))
    clean_end = step_env(_state(seed=3), VelocityCommand(1, 0), 0.2, LIMITS, _world())
    noisy_end = step_env(_state(seed=3), VelocityCommand(1, 0), 0.2, noisy, _world())
    assert noisy_end.robot_vel == clean_end.robot_vel
    assert noisy_end.robot_pose.position != clean_end.robot_pose.position
    # Same seed, same draws.
    again = step_env(_state(seed=3), VelocityCommand(1, 0), 0.2, noisy, _world())
    assert again.robot_pose.position == noisy_end.robot_pose.position


def test_humans_advance_during_step():
    walker = HumanState(
        position=Vec2(5.0, 5.0),
        velocity=Vec2(0.0, 0.0),
        waypoints=(Vec2(5.0, 5.0), Vec2(8.0, 5.0)),
        current_waypoint=1,
        goal=Pose2(Vec2(8.0, 5.0), 0.0),
    )
    s1 = step_env(_state(humans=[walker]), VelocityCommand(0, 0), 0.2, LIMITS, _world())
    assert s1.humans[0].position.x > 5.0


# ----------------------------------------------------------------- collisions


def test_collision_counts():
    world = _world()
    assert detect_collisions(_state(humans=[_human(0.5, 0)]), world) == (1, 0)
    assert detect_collisions(_state(humans=[_human(1.0, 0)]), world) == (0, 0)
    walled = _world([Segment(Vec2(0.2, -1), Vec2(0.2, 1))])
    assert detect_collisions(_state(), walled) == (0, 1)
    both = _world([Segment(Vec2(0.2, -1), Vec2(0.2, 1))])
    assert detect_collisions(
        _state(humans=[_human(0.5, 0), _human(0.0, 0.4)]), both
    ) == (2, 1)


# ----------------------------------------------------------------------- scan


def test_scan_wall_one_meter_ahead():
    world = _world([Segment(Vec2(1.0, -2.0), Vec2(1.0, 2.0))])
    scan = simulate_scan(_state(), world, ScanConfig())
    forward = scan[np.isclose(scan[:, 0], 0.0)]
    assert forward.shape[0] == 1
    assert forward[0, 1] == pytest.approx(1.0, abs=1e-12)


def test_scan_empty_world_is_max_range():
    cfg = ScanConfig(rays=90, max_range=7.5)
    scan = simulate_scan(_state(), _world(), cfg)
    assert scan.shape == (90, 2)
    assert np.all(scan[:, 1] == 7.5)
    assert scan_to_points(scan, cfg.max_range).shape == (0, 2)


def test_scan_human_disc():
    scan = simulate_scan(_state(humans=[_human(2.0, 0.0)]), _world(), ScanConfig())
    forward = scan[np.isclose(scan[:, 0], 0.0)]
    assert forward[0, 1] == pytest.approx(1.7, abs=1e-12)


def test_scan_ranges_bounded_fuzz():
    rng = np.random.default_rng(12)
    cfg = ScanConfig(rays=60)
    for _ in range(50):
        walls = [
            Segment(
                Vec2(*rng.uniform(-5, 5, 2).tolist()),
                Vec2(*rng.uniform(-5, 5, 2).tolist()),
            )
            for _ in range(int(rng.integers(0, 6)))
        ]
        humans = [
            _human(*rng.uniform(-5, 5, 2).tolist())
            for _ in range(int(rng.integers(0, 4)))
        ]
        state = _state(
            x=float(rng.uniform(-2, 2)),
            y=float(rng.uniform(-2, 2)),
            theta=float(rng.uniform(-math.pi, math.pi)),
            humans=humans,
        )
        scan = simulate_scan(state, _world(walls), cfg)
        assert np.all(scan[:, 1] >= 0.0)
        assert np.all(scan[:, 1] <= cfg.max_range)


def test_scan_respects_fov_and_heading():
    world = _world([Segment(Vec2(-2.0, -1.0), Vec2(2.0, -1.0))])
    # Robot facing +y with a forward-only wedge: the wall sits behind,
    # outside the 90 degree cone, so every ray runs to max range.
    cfg = ScanConfig(rays=19, fov_deg=90.0)
    scan = simulate_scan(_state(theta=math.pi / 2), world, cfg)
    assert np.all(scan[:, 1] == cfg.max_range)
    assert scan[0, 0] == pytest.approx(-math.pi / 4)
    assert scan[-1, 0] == pytest.approx(math.pi / 4)


# -------------------------------------------------------------------- observe


def test_observation_layout_and_frames():
    state = _state(theta=math.pi / 2, vel=(1.0, 0.2), humans=[_human(2, 1, 0.5, 0.0)])
    obs = observe(state, _world(), Vec2(0.0, 5.0), h_cap=2)
    assert obs.shape == (obs_dim(2),)
    # Goal at (10, 0) world, robot facing +y: ahead is world +y.
    assert obs[0] == pytest.approx(0.0, abs=1e-12)
    assert obs[1] == pytest.approx(-10.0)
    # Local goal (0, 5) world -> 5 m straight ahead.
    assert obs[2] == pytest.approx(5.0)
    assert obs[3] == pytest.approx(0.0, abs=1e-12)
    assert obs[4] == 1.0 and obs[5] == 0.2
    # Human at (2, 1): 1 m ahead, 2 m to the right.
    assert obs[6] == pytest.approx(1.0)
    assert obs[7] == pytest.approx(-2.0)
    # Relative velocity (0.5, 0) - (0, 1) world, rotated into the frame.
    assert obs[8] == pytest.approx(-1.0)
    assert obs[9] == pytest.approx(-0.5)
    assert np.all(obs[10:] == 0.0)


def test_observation_zero_humans_all_slots_zero():
    obs = observe(_state(), _world(), Vec2(1, 0), h_cap=5)
    assert obs.shape == (26,)
    assert np.all(obs[6:] == 0.0)


def test_observation_sorts_by_distance():
    state = _state(humans=[_human(3.0, 0.0), _human(1.0, 0.0)])
    obs = observe(state, _world(), Vec2(1, 0), h_cap=5)
    assert obs[6] == pytest.approx(0.7) or obs[6] == pytest.approx(1.0)
    assert obs[6] == pytest.approx(1.0)  # nearest first
    assert obs[10] == pytest.approx(3.0)


def test_occluded_human_slot_is_zero():
    wall = Segment(Vec2(2.0, -1.0), Vec2(2.0, 1.0))
    hidden = _human(4.0, 0.0)
    seen = _human(1.0, 1.0)
    state = _state(humans=[hidden, seen])
    obs = observe(state, _world([wall]), Vec2(1, 0), h_cap=2)
    assert obs[6] == pytest.approx(1.0)
    assert obs[7] == pytest.approx(1.0)
    assert np.all(obs[10:14] == 0.0)
    assert [h.position.x for h in visible_humans(state, _world([wall]))] == [1.0]


def test_h_cap_truncates_extra_humans():
    state = _state(humans=[_human(1, 0), _human(2, 0), _human(3, 0)])
    obs = observe(state, _world(), Vec2(1, 0), h_cap=1)
    assert obs.shape == (10,)
    assert obs[6] == pytest.approx(1.0)


def _visibility_oracle(p: Vec2, q: Vec2, walls: list[Segment]) -> bool:
    """Sampling check: walk the sight line, watch for side flips.

    Endpoints are included so flips in the first and last interval are
    seen; an exact endpoint touch gives sign 0, which is not a strict
    flip, matching the open-segment crossing semantics.
    """
    ts = np.linspace(0.0, 1.0, 1001)
    xs = p.x + (q.x - p.x) * ts
    ys = p.y + (q.y - p.y) * ts
    for wall in walls:
        ax, ay = wall.a.x, wall.a.y
        bx, by = wall.b.x, wall.b.y
        wx, wy = bx - ax, by - ay
        side = wx * (ys - ay) - wy * (xs - ax)
        u = (wx * (xs - ax) + wy * (ys - ay)) / (wx * wx + wy * wy)
        flips = np.nonzero(np.sign(side[:-1]) * np.sign(side[1:]) < 0)[0]
        for i in flips:
            frac = abs(side[i]) / (abs(side[i]) + abs(side[i + 1]))
            u_star = u[i] + (u[i + 1] - u[i]) * frac
            if 0.0 <= u_star <= 1.0:
                return False
    return True


def test_visibility_matches_sampling_oracle():
    rng = np.random.default_rng(42)
    agree = 0
    total = 1000
    for _ in range(total):
        walls = [
            Segment(
                Vec2(*rng.uniform(-4, 4, 2).tolist()),
                Vec2(*rng.uniform(-4, 4, 2).tolist()),
            )
            for _ in range(int(rng.integers(1, 5)))
        ]
        human = _human(*rng.uniform(-4, 4, 2).tolist())
        state = _state(
            x=float(rng.uniform(-4, 4)), y=float(rng.uniform(-4, 4)), humans=[human]
        )
        expected = _visibility_oracle(
            state.robot_pose.position, human.position, walls
        )
        got = len(visible_humans(state, _world(walls))) == 1
        agree += got == expected
    assert agree == total
