"""
Benchmarking policies against each other
========================================

Evaluates the four engineered baselines on an identical slate of seeded
episodes and prints the aggregate table. Small episode count here to
stay quick; the real benchmark uses hundreds.
"""

from socnav import POLICY_NAMES, default_config, make_policy, run_benchmark

cfg = default_config(seed=3)
policies = [make_policy(name, seed=cfg.seed) for name in POLICY_NAMES]
report = run_benchmark(policies, cfg, n_episodes=10)

print(f"{'policy':10} {'success':>8} {'max force':>20} {'max blame':>10}")
for name in POLICY_NAMES:
    agg = report.policies[name]
    f = agg["max_force"]
    print(f"{name:10} {agg['success_rate']:8.2f} "
          f"{f['mean']:9.3f} ± {f['ci90'][1] - f['mean']:<8.3f} "
          f"{agg['max_blame']['mean']:10.3f}")

# Reports serialize to JSON for archiving; the fingerprint pins the
# exact configuration the numbers were measured under.
print("\nconfig fingerprint:", report.config_fingerprint[:16])
