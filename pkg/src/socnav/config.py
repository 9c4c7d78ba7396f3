"""Aggregate simulation configuration and its JSON file format.

One SimConfig pins everything a benchmark run depends on: the map, the
scenario generator, force model, robot limits, planner constants, the
scanner, and reward weights. The loader is strict: unknown keys are
errors, so typos fail loudly instead of silently running defaults.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field, fields
from typing import Any

from .env import ScanConfig
from .episode import RewardWeights, canonical_json
from .humans import SocialForceParams
from .nav import MotionLimits, NavParams, RolloutParams
from .world import (
    BUILTIN_MAPS,
    ConfigError,
    ScenarioConfig,
    WorldMap,
    load_map,
    world_from_dict,
    world_to_dict,
)

CONFIG_FORMAT_VERSION = 1


@dataclass(frozen=True, slots=True)
class SimConfig:
    """Everything one reproducible run needs."""

    scenario: ScenarioConfig
    sf: SocialForceParams = field(default_factory=SocialForceParams)
    limits: MotionLimits = field(default_factory=MotionLimits)
    nav: NavParams = field(default_factory=NavParams)
    scan: ScanConfig = field(default_factory=ScanConfig)
    rewards: RewardWeights = field(default_factory=RewardWeights)
    h_cap: int = 5

    def __post_init__(self) -> None:
        if self.h_cap < self.scenario.h_max:
            raise ConfigError(
                f"h_cap {self.h_cap} cannot hold h_max {self.scenario.h_max} humans"
            )

    @property
    def world(self) -> WorldMap:
        return self.scenario.world

    @property
    def seed(self) -> int:
        return self.scenario.seed

    @property
    def obs_dim(self) -> int:
        return 6 + 4 * self.h_cap


def default_config(
    world: WorldMap | str = "training", seed: int = 0, **scenario_overrides
) -> SimConfig:
    """SimConfig with all defaults on the named or given map."""
    if isinstance(world, str):
        world = load_map(world)
    return SimConfig(scenario=ScenarioConfig(world=world, seed=seed, **scenario_overrides))


def _from_section(name: str, cls, data: dict, **extra):
    """Build a dataclass from a JSON section, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigError(f"section {name!r} must be an object")
    allowed = {f.name for f in fields(cls)} - set(extra)
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {name!r}: {sorted(unknown)}")
    try:
        return cls(**data, **extra)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {name!r} section: {exc}") from exc


def _load_world(spec: Any, base_dir: str) -> WorldMap:
    if isinstance(spec, dict):
        return world_from_dict(spec)  # map embedded in the config
    if not isinstance(spec, str):
        raise ConfigError("'map' must be a builtin name, a file path, or a map object")
    if spec in BUILTIN_MAPS:
        return load_map(spec)
    path = spec if os.path.isabs(spec) else os.path.join(base_dir, spec)
    if not os.path.exists(path):
        raise ConfigError(f"map {spec!r} is neither builtin {BUILTIN_MAPS} nor a file")
    with open(path, encoding="utf-8") as fh:
        return world_from_dict(json.load(fh))


_TOP_KEYS = {
    "format_version",
    "map",
    "seed",
    "h_cap",
    "scenario",
    "social_force",
    "navigation",
    "scan",
    "rewards",
}

# Keys of the "navigation" section that belong to MotionLimits rather
# than NavParams.
_LIMIT_KEYS = {"v_max", "w_max", "a_max", "alpha_max", "noise_std"}


def config_from_dict(data: dict, base_dir: str = ".") -> SimConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {sorted(unknown)}")
    version = data.get("format_version", CONFIG_FORMAT_VERSION)
    if version != CONFIG_FORMAT_VERSION:
        raise ConfigError(f"unsupported config format_version {version!r}")

    world = _load_world(data.get("map", "training"), base_dir)
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("'seed' must be an integer")

    scenario = _from_section(
        "scenario", ScenarioConfig, data.get("scenario", {}), world=world, seed=seed
    )
    sf = _from_section("social_force", SocialForceParams, data.get("social_force", {}))

    nav_section = dict(data.get("navigation", {}))
    if not isinstance(nav_section, dict):
        raise ConfigError("section 'navigation' must be an object")
    limits_data = {k: nav_section.pop(k) for k in list(nav_section) if k in _LIMIT_KEYS}
    if "noise_std" in limits_data:
        limits_data["noise_std"] = tuple(limits_data["noise_std"])
    rollout_data = nav_section.pop("rollout", {})
    if "lead_cone_deg" in nav_section:
        nav_section["lead_cone"] = math.radians(nav_section.pop("lead_cone_deg"))
    limits = _from_section("navigation", MotionLimits, limits_data)
    rollout = _from_section("navigation.rollout", RolloutParams, rollout_data)
    nav = _from_section("navigation", NavParams, nav_section, rollout=rollout)

    scan = _from_section("scan", ScanConfig, data.get("scan", {}))
    rewards = _from_section("rewards", RewardWeights, data.get("rewards", {}))
    h_cap = data.get("h_cap", 5)
    if not isinstance(h_cap, int) or isinstance(h_cap, bool) or h_cap < 0:
        raise ConfigError("'h_cap' must be a nonnegative integer")
    return SimConfig(
        scenario=scenario,
        sf=sf,
        limits=limits,
        nav=nav,
        scan=scan,
        rewards=rewards,
        h_cap=h_cap,
    )


def load_config(path: str) -> SimConfig:
    """Parse a config JSON file; raises ConfigError on any problem."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    return config_from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))


def config_to_dict(cfg: SimConfig) -> dict:
    """Full parameter dump, map content included (used for fingerprints)."""
    sc = cfg.scenario
    return {
        "format_version": CONFIG_FORMAT_VERSION,
        "map": world_to_dict(sc.world),
        "seed": sc.seed,
        "h_cap": cfg.h_cap,
        "scenario": {
            "h_min": sc.h_min,
            "h_max": sc.h_max,
            "n_repeat": sc.n_repeat,
            "n_max_iters": sc.n_max_iters,
            "eps_success": sc.eps_success,
            "t_fail": sc.t_fail,
        },
        "social_force": {
            f.name: getattr(cfg.sf, f.name) for f in fields(SocialForceParams)
        },
        "navigation": {
            "v_max": cfg.limits.v_max,
            "w_max": cfg.limits.w_max,
            "a_max": cfg.limits.a_max,
            "alpha_max": cfg.limits.alpha_max,
            "noise_std": list(cfg.limits.noise_std),
            "control_period": cfg.nav.control_period,
            "connect_radius": cfg.nav.connect_radius,
            "waypoint_reach": cfg.nav.waypoint_reach,
            "follow_gap": cfg.nav.follow_gap,
            "pass_offset": cfg.nav.pass_offset,
            "pass_prediction": cfg.nav.pass_prediction,
            "lead_cone": cfg.nav.lead_cone,
            "lead_range": cfg.nav.lead_range,
            "rollout": {
                f.name: getattr(cfg.nav.rollout, f.name) for f in fields(RolloutParams)
            },
        },
        "scan": {f.name: getattr(cfg.scan, f.name) for f in fields(ScanConfig)},
        "rewards": {f.name: getattr(cfg.rewards, f.name) for f in fields(RewardWeights)},
    }


def config_fingerprint(cfg: SimConfig) -> str:
    """Short stable hash over every parameter, map geometry included."""
    return hashlib.sha256(canonical_json(config_to_dict(cfg)).encode()).hexdigest()[:16]
