"""Baseline policies and the batch benchmark runner.

Four engineered agents cover the benchmark's reference points: GoAlone
(pure rollout navigation), AlwaysHalt (lower bound), Random (seeded
noise floor), and Ref, a rule-based social policy that yields around
nearby pedestrians. run_benchmark evaluates any set of policies on an
identical scenario list and aggregates success rates and social metrics
with 90% normal-approximation confidence intervals.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from itertools import islice
from statistics import fmean, stdev
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .config import config_fingerprint
from .env import visible_humans
from .episode import (
    AgentProtocolError,
    EpisodeRecord,
    canonical_json,
    run_episode,
)
from .nav import DiscreteAction, select_lead_human
from .world import Scenario, scenario_hash, scenario_schedule

if TYPE_CHECKING:
    from .config import SimConfig

Z90 = 1.6448536269514722  # two-sided 90% normal quantile

POLICY_NAMES = ("goalone", "halt", "random", "ref")


class GoAlonePolicy:
    """Always head for the goal; the pure-navigation baseline."""

    name = "goalone"

    def spawn(self, episode_index: int):
        return self

    def act(self, obs, runner) -> DiscreteAction:
        return DiscreteAction.GO_ALONE


class AlwaysHaltPolicy:
    """Never moves; calibrates the zero of every success metric."""

    name = "halt"

    def spawn(self, episode_index: int):
        return self

    def act(self, obs, runner) -> DiscreteAction:
        return DiscreteAction.HALT


class RandomPolicy:
    """Uniform random action each step, reseeded per episode.

    Per-episode streams keyed on (seed, episode index) keep results
    identical whether episodes run serially or in parallel.
    """

    name = "random"

    def __init__(self, seed: int = 0):
        self.seed = seed

    def spawn(self, episode_index: int):
        return _RandomAgent(self.seed, episode_index)


class _RandomAgent:
    def __init__(self, seed: int, episode_index: int):
        self._rng = np.random.default_rng(np.random.SeedSequence((seed, episode_index)))

    def act(self, obs, runner) -> int:
        return int(self._rng.integers(0, 4))


@dataclass(frozen=True, slots=True)
class RefParams:
    """Rule thresholds for the social reference policy."""

    engage_range: float = 2.5   # closer than this, stop ignoring the human
    halt_range: float = 1.5     # head-on inside this, stop
    radial_speed: float = 0.1   # away/toward classification deadband, m/s


class RefPolicy:
    """Rule-based social reference behavior.

    With no human inside the forward cone within engage_range it goes
    alone; it follows a lead human walking away, halts for one
    approaching head-on inside halt_range, and passes otherwise.
    """

    name = "ref"

    def __init__(self, params: RefParams = RefParams()):
        self.params = params

    def spawn(self, episode_index: int):
        return self

    def act(self, obs, runner) -> DiscreteAction:
        state = runner.state
        visible = visible_humans(state, runner.world)
        lead_i = select_lead_human(state, visible, runner.cfg.nav)
        if lead_i is None:
            return DiscreteAction.GO_ALONE
        lead = visible[lead_i]
        offset = lead.position - state.robot_pose.position
        d = offset.norm()
        if d > self.params.engage_range:
            return DiscreteAction.GO_ALONE
        radial = lead.velocity.dot(offset * (1.0 / d)) if d > 1e-9 else 0.0
        if radial > self.params.radial_speed:
            return DiscreteAction.FOLLOW
        if radial < -self.params.radial_speed and d < self.params.halt_range:
            return DiscreteAction.HALT
        return DiscreteAction.PASS


def make_policy(name: str, seed: int = 0):
    """Baseline policy by name: goalone, halt, random, or ref."""
    table = {
        "goalone": GoAlonePolicy,
        "halt": AlwaysHaltPolicy,
        "random": lambda: RandomPolicy(seed),
        "ref": RefPolicy,
    }
    if name not in table:
        raise ValueError(f"unknown policy {name!r}; expected one of {POLICY_NAMES}")
    return table[name]()


@dataclass(frozen=True)
class BenchReport:
    """Aggregated benchmark results for one scenario list."""

    n_episodes: int
    config_fingerprint: str
    scenario_hashes: tuple[str, ...]
    policies: dict[str, dict]

    def to_dict(self) -> dict:
        return {
            "n_episodes": self.n_episodes,
            "config_fingerprint": self.config_fingerprint,
            "scenario_hashes": list(self.scenario_hashes),
            "policies": self.policies,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())


def _summary(values: Sequence[float]) -> dict:
    vals = [float(v) for v in values]
    n = len(vals)
    if n == 0:
        return {"mean": None, "ci90": None, "n": 0}
    mean = fmean(vals)
    half = Z90 * stdev(vals) / math.sqrt(n) if n > 1 else 0.0
    return {"mean": mean, "ci90": [mean - half, mean + half], "n": n}


def _aggregate(records: Sequence[EpisodeRecord]) -> dict:
    n = len(records)
    successes = [r for r in records if r.clean_success]
    return {
        "episodes": n,
        "successes": len(successes),
        "success_rate": len(successes) / n if n else 0.0,
        "max_force": _summary([r.max_force for r in records]),
        "max_blame": _summary([r.max_blame for r in records]),
        "time_to_goal": _summary([r.time_to_goal for r in successes]),
        "distance_traveled": _summary([r.distance_traveled for r in records]),
    }


def _policy_name(policy, fallback: str) -> str:
    return getattr(policy, "name", None) or fallback


def run_benchmark(
    policies: Sequence,
    cfg: "SimConfig",
    n_episodes: int | None = None,
    n_jobs: int = 1,
) -> BenchReport:
    """Evaluate every policy on one identical scenario list.

    Scenarios come from the config's seeded schedule; episode i also gets
    a fixed noise stream shared by all policies, so comparisons are
    paired. Aggregation is order-independent, which keeps parallel and
    serial runs byte-identical.
    """
    n = n_episodes if n_episodes is not None else cfg.scenario.n_max_iters
    schedule_cfg = replace(cfg.scenario, n_max_iters=n)
    scenarios: list[Scenario] = [s for s, _ in islice(scenario_schedule(schedule_cfg), n)]
    hashes = tuple(scenario_hash(s) for s in scenarios)

    results: dict[str, dict] = {}
    for k, policy in enumerate(policies):
        name = _policy_name(policy, f"policy{k}")
        if name in results:
            raise ValueError(f"duplicate policy name {name!r}")

        def run_one(i: int, policy=policy, name=name) -> EpisodeRecord:
            agent = policy.spawn(i) if hasattr(policy, "spawn") else policy
            rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, i)))
            try:
                return run_episode(scenarios[i], agent, cfg, rng=rng)
            except AgentProtocolError as exc:
                raise AgentProtocolError(
                    f"policy {name!r}, episode {i} ({hashes[i]}): {exc}"
                ) from exc

        if n_jobs > 1:
            with ThreadPoolExecutor(max_workers=n_jobs) as pool:
                records = list(pool.map(run_one, range(n)))
        else:
            records = [run_one(i) for i in range(n)]
        for record, expect in zip(records, hashes):
            assert record.scenario_id == expect  # scenario parity across policies
        results[name] = _aggregate(records)

    return BenchReport(
        n_episodes=n,
        config_fingerprint=config_fingerprint(cfg),
        scenario_hashes=hashes,
        policies=results,
    )


def record_demonstrations(
    policy, cfg: "SimConfig", n_episodes: int, out_path: str
) -> int:
    """Write {obs, action, reward, done} JSONL from running a policy.

    Returns the number of recorded steps. A failed write removes the
    partial file before re-raising.
    """
    n_steps = 0
    schedule_cfg = replace(cfg.scenario, n_max_iters=max(n_episodes, 1))
    scenarios = [s for s, _ in islice(scenario_schedule(schedule_cfg), n_episodes)]
    try:
        with open(out_path, "w", encoding="utf-8") as fh:
            for i, scenario in enumerate(scenarios):
                agent = policy.spawn(i) if hasattr(policy, "spawn") else policy
                rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, i)))
                record = run_episode(scenario, agent, cfg, rng=rng)
                last = record.n_steps - 1
                for j, line in enumerate(record.steps):
                    fh.write(
                        canonical_json(
                            {
                                "obs": line["obs"],
                                "action": line["action"],
                                "reward": line["reward"],
                                "done": j == last,
                            }
                        )
                        + "\n"
                    )
                    n_steps += 1
    except OSError:
        if os.path.exists(out_path):
            os.unlink(out_path)
        raise
    return n_steps
