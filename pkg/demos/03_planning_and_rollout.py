"""
Global graph planning and local trajectory rollout
==================================================

The global planner runs Dijkstra over the map's waypoint graph; the
local planner samples kinematically reachable arcs and keeps the safe
ones. Together they take the robot around obstacles it never saw on
the map.
"""

import numpy as np

from socnav import (
    MotionLimits,
    Pose2,
    Vec2,
    load_map,
    plan_global,
    rollout_local,
)

world = load_map("training")

# Pick two legal poses and plan between them.
start, goal = world.legal_poses[0], world.legal_poses[-1]
plan = plan_global(world, start, goal)
print(f"route cost {plan.cost:.2f} m over {len(plan.waypoints)} waypoints:")
for wp in plan.waypoints:
    print(f"  ({wp.position.x:6.2f}, {wp.position.y:6.2f})")

# The local planner works in the robot frame: scan points ahead, a local
# goal, and the current velocity state are all it sees.
class State:
    robot_pose = Pose2(Vec2(0, 0), 0.0)
    robot_vel = (0.8, 0.0)


# A wall of scan hits dead ahead, with a gap off to the left.
obstacles = np.array([[2.0, y] for y in np.arange(-1.5, 0.6, 0.1)])
cmd = rollout_local(State(), obstacles, Vec2(4.0, 0.0), MotionLimits())
print(f"\nblocked ahead, gap left -> command v={cmd.linear:.2f} m/s, "
      f"w={cmd.angular:+.2f} rad/s (turns {'left' if cmd.angular > 0 else 'right'})")

# With nothing in range it just drives at the goal.
cmd_free = rollout_local(State(), np.empty((0, 2)), Vec2(4.0, 0.0), MotionLimits())
print(f"open space            -> command v={cmd_free.linear:.2f} m/s, "
      f"w={cmd_free.angular:+.2f} rad/s")
