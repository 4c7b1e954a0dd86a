"""Side-by-side QoS evaluation of several policies on shared seeds."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

from ..config import NetworkConfig
from ..env.simulator import VehicularEnv
from ..seeding import env_seed, stream
from .baselines import RandomPolicy
from .qos import EpisodeMetrics, collect_episode, qos_satisfaction

METHOD_ORDER = ("random", "ddpg", "attention", "sverl")


@dataclass
class ComparisonRow:
    method: str
    urllc_pct: Optional[float]
    embb_pct: Optional[float]
    episodes: int
    mean_reward: float


def evaluate_policy(config: NetworkConfig, policy_factory: Callable[[int], Callable], seeds: Sequence[int],
                    episodes: int, steps: int) -> list[EpisodeMetrics]:
    """Run ``episodes`` noise-free episodes per evaluation seed.

    ``policy_factory(seed)`` returns the observation -> action callable used for
    that seed, so stochastic baselines can be seeded per run.
    """
    series = []
    for seed in seeds:
        env = VehicularEnv(config, env_seed(seed, 1))
        policy = policy_factory(seed)
        for _ in range(episodes):
            series.append(collect_episode(env, policy, steps))
    return series


def random_factory(config: NetworkConfig):
    return lambda seed: RandomPolicy(stream(seed, "eval"), config.num_vehicles, config.num_gnbs)


def run_comparison(config: NetworkConfig, methods: Mapping[str, Callable[[int], Callable]],
                   seeds: Sequence[int], episodes: int, steps: int) -> list[ComparisonRow]:
    rows = []
    ordered = sorted(methods, key=lambda m: (METHOD_ORDER.index(m) if m in METHOD_ORDER else len(METHOD_ORDER), m))
    for name in ordered:
        series = evaluate_policy(config, methods[name], seeds, episodes, steps)
        urllc, embb = qos_satisfaction(series)
        mean_reward = sum(m.total_reward for m in series) / (len(series) * steps)
        rows.append(ComparisonRow(name, urllc, embb, len(series), mean_reward))
    return rows
