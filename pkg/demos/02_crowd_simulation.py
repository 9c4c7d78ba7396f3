"""
Social-force pedestrians
========================

Two walkers cross a corridor head-on. Goal attraction pulls each toward
its waypoint while mutual repulsion bends the paths apart; nobody
touches anybody.
"""

import math

from socnav import HumanState, Pose2, SocialForceParams, Vec2, step_humans

params = SocialForceParams()
dt = 0.05


def walker(start: Vec2, goal: Vec2) -> HumanState:
    return HumanState(position=start, velocity=Vec2(0, 0),
                      waypoints=(goal,), current_waypoint=0,
                      goal=Pose2(goal, 0.0))


crowd = [
    walker(Vec2(0.0, 0.0), Vec2(10.0, 0.0)),
    walker(Vec2(10.0, 0.5), Vec2(0.0, 0.5)),
]

min_gap = math.inf
for k in range(int(15.0 / dt)):
    crowd = step_humans(crowd, None, [], params, dt)
    gap = crowd[0].position.dist(crowd[1].position)
    min_gap = min(min_gap, gap)
    if k % 40 == 0:
        print(f"t={k * dt:5.1f}s  a=({crowd[0].position.x:5.2f}, {crowd[0].position.y:5.2f})"
              f"  b=({crowd[1].position.x:5.2f}, {crowd[1].position.y:5.2f})  gap={gap:.2f} m")

print(f"\nclosest approach: {min_gap:.2f} m "
      f"(contact would be {2 * params.agent_radius:.1f} m)")
print("both arrived:",
      crowd[0].position.dist(Vec2(10, 0)) < 0.5 and crowd[1].position.dist(Vec2(0, 0.5)) < 0.5)
