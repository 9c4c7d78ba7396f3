"""
Closed-loop episodes and the reward ledger
==========================================

Runs one full episode with the rule-based social policy, then shows
that every logged reward re-derives from the logged metrics alone:
the log is the ground truth, not a side channel.
"""

from socnav import (
    RefPolicy,
    Terminal,
    default_config,
    discounted_return,
    reward_formula,
    run_episode,
    scenario_schedule,
)

cfg = default_config(seed=23)
scenario, _ = next(scenario_schedule(cfg.scenario))
record = run_episode(scenario, RefPolicy(), cfg)

print(f"outcome={record.outcome.name} steps={record.n_steps} "
      f"path={record.distance_traveled:.1f} m")
print(f"max force={record.max_force:.3f} max blame={record.max_blame:.3f} "
      f"collisions: {record.human_collisions} human / {record.wall_collisions} wall")

# Each step logs (d_g, force, blame, reward, ...). Recompute the reward
# from the metrics and compare against what the runner wrote down.
w = cfg.rewards
worst = 0.0
for i, step in enumerate(record.steps):
    success = i == record.n_steps - 1 and record.outcome is Terminal.SUCCESS
    again = reward_formula(step["d_g"], step["force"], step["blame"], success, w)
    worst = max(worst, abs(again - step["reward"]))
print(f"\nreward recompute, worst |error| over {record.n_steps} steps: {worst:.2e}")

ret = discounted_return([s["reward"] for s in record.steps], w.gamma)
print(f"discounted return: logged {record.discounted_return:.6f} "
      f"recomputed {ret:.6f} (|diff| {abs(ret - record.discounted_return):.2e})")
