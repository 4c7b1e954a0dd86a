"""Per-(vehicle, slot) QoS bookkeeping and satisfaction rates."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from ..env.simulator import VehicularEnv


@dataclass
class EpisodeMetrics:
    """Arrays shaped (T,) for rewards and (T, N) for per-vehicle quantities."""

    reward: np.ndarray
    delay: np.ndarray
    rate: np.ndarray
    association: np.ndarray
    s_urllc: np.ndarray
    s_embb: np.ndarray
    active: np.ndarray
    urllc_violation: np.ndarray
    embb_violation: np.ndarray
    urllc_penalty: np.ndarray
    embb_penalty: np.ndarray

    @property
    def urllc_opportunities(self) -> int:
        return int(np.sum(self.active & self.s_urllc))

    @property
    def embb_opportunities(self) -> int:
        return int(np.sum(self.active & self.s_embb))

    @property
    def urllc_satisfied(self) -> int:
        return int(np.sum(self.active & self.s_urllc & ~self.urllc_violation))

    @property
    def embb_satisfied(self) -> int:
        return int(np.sum(self.active & self.s_embb & ~self.embb_violation))

    @property
    def total_reward(self) -> float:
        return float(self.reward.sum())


def collect_episode(env: VehicularEnv, policy: Callable, steps: int, reset: bool = True) -> EpisodeMetrics:
    """Roll ``policy`` (observation -> flat action) for ``steps`` slots."""
    s = env.reset() if reset else env.assemble_state()
    cols = {k: [] for k in ("reward", "delay", "rate", "association", "s_urllc", "s_embb", "active",
                            "urllc_violation", "embb_violation", "urllc_penalty", "embb_penalty")}
    for _ in range(steps):
        out = env.step(policy(s))
        cols["reward"].append(out.reward)
        cols["delay"].append(out.delay)
        cols["rate"].append(out.rate)
        cols["association"].append(out.allocation.association)
        cols["s_urllc"].append(out.s_urllc)
        cols["s_embb"].append(out.s_embb)
        cols["active"].append(out.active)
        cols["urllc_violation"].append(out.urllc_violation)
        cols["embb_violation"].append(out.embb_violation)
        cols["urllc_penalty"].append(out.urllc_penalty)
        cols["embb_penalty"].append(out.embb_penalty)
        s = out.observation
    return EpisodeMetrics(**{k: np.array(v) for k, v in cols.items()})


def qos_satisfaction(series: Iterable[EpisodeMetrics]) -> tuple[Optional[float], Optional[float]]:
    """Percent of (vehicle, slot) opportunities meeting their slice target.

    A slice with no opportunities is reported as None (not applicable).
    """
    series = list(series)
    if not series:
        raise ValueError("qos_satisfaction needs at least one episode")
    u_hit = sum(m.urllc_satisfied for m in series)
    u_tot = sum(m.urllc_opportunities for m in series)
    e_hit = sum(m.embb_satisfied for m in series)
    e_tot = sum(m.embb_opportunities for m in series)
    urllc = 100.0 * u_hit / u_tot if u_tot else None
    embb = 100.0 * e_hit / e_tot if e_tot else None
    return urllc, embb
