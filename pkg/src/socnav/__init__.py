"""Lightweight 2D social navigation simulator and benchmark harness.

The package splits into layers that can be used independently:

- geom: immutable 2D primitives and batch geometry kernels
- world: maps, navigation graphs, scenario generation
- humans: social-force pedestrian simulation
- nav: global graph planner, local trajectory rollout, discrete actions
- env: simulation state, sensing, observation encoding
- episode: closed-loop episode runner, metrics, reward bookkeeping
- harness: baseline policies and the batch benchmark runner
- server: line-delimited JSON service exposing the episode loop
- cli: serve / bench / replay / validate-map front end

The names re-exported here are the supported surface; everything else
is internal and may change.
"""

from .config import (
    ConfigError,
    SimConfig,
    config_fingerprint,
    config_from_dict,
    config_to_dict,
    default_config,
    load_config,
)
from .env import (
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
from .episode import (
    AgentProtocolError,
    EpisodeRecord,
    EpisodeRunner,
    RewardWeights,
    StepMetrics,
    StepOutcome,
    canonical_json,
    compute_blame,
    compute_force,
    compute_reward,
    discounted_return,
    reward_formula,
    run_episode,
)
from .geom import Pose2, Segment, Vec2
from .harness import (
    AlwaysHaltPolicy,
    BenchReport,
    GoAlonePolicy,
    POLICY_NAMES,
    RandomPolicy,
    RefParams,
    RefPolicy,
    make_policy,
    record_demonstrations,
    run_benchmark,
)
from .humans import HumanState, SocialForceParams, step_humans
from .nav import (
    DiscreteAction,
    GlobalPlan,
    MotionLimits,
    NavParams,
    NoPathError,
    RolloutParams,
    VelocityCommand,
    execute_action,
    plan_global,
    rollout_local,
    select_lead_human,
)
from .server import Session, serve
from .world import (
    Scenario,
    ScenarioConfig,
    Terminal,
    WorldMap,
    generate_scenario,
    load_map,
    save_map,
    scenario_hash,
    scenario_schedule,
    validate_world,
    world_from_dict,
    world_to_dict,
)

__version__ = "0.1.0"

__all__ = [
    "AgentProtocolError",
    "AlwaysHaltPolicy",
    "BenchReport",
    "ConfigError",
    "DiscreteAction",
    "EpisodeRecord",
    "EpisodeRunner",
    "GlobalPlan",
    "GoAlonePolicy",
    "HumanState",
    "MotionLimits",
    "NavParams",
    "NoPathError",
    "POLICY_NAMES",
    "Pose2",
    "RandomPolicy",
    "RefParams",
    "RefPolicy",
    "RewardWeights",
    "RolloutParams",
    "ScanConfig",
    "Scenario",
    "ScenarioConfig",
    "Segment",
    "Session",
    "SimConfig",
    "SimState",
    "SocialForceParams",
    "StepMetrics",
    "StepOutcome",
    "Terminal",
    "Vec2",
    "VelocityCommand",
    "WorldMap",
    "canonical_json",
    "compute_blame",
    "compute_force",
    "compute_reward",
    "config_fingerprint",
    "config_from_dict",
    "config_to_dict",
    "default_config",
    "detect_collisions",
    "discounted_return",
    "execute_action",
    "generate_scenario",
    "load_map",
    "make_policy",
    "obs_dim",
    "observe",
    "plan_global",
    "record_demonstrations",
    "reward_formula",
    "rollout_local",
    "run_benchmark",
    "run_episode",
    "save_map",
    "scan_to_points",
    "scenario_hash",
    "scenario_schedule",
    "select_lead_human",
    "serve",
    "simulate_scan",
    "step_env",
    "step_humans",
    "validate_world",
    "visible_humans",
    "world_from_dict",
    "world_to_dict",
]
