"""Training loop: act, step, store, learn; periodic Shapley supervision of alpha."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..config import TrainConfig
from ..env.simulator import VehicularEnv
from ..explain.rollouts import explain_state
from ..seeding import stream, stream_key
from .ddpg import DDPGAgent
from .replay import ReplayBuffer

METRIC_FIELDS = ("episode", "mean_reward", "critic_loss", "actor_loss", "explain_loss",
                 "noise_sigma", "urllc_pct", "embb_pct", "updates")


@dataclass
class EpisodeRecord:
    episode: int
    mean_reward: float
    critic_loss: float
    actor_loss: float
    explain_loss: float
    noise_sigma: float
    urllc_pct: float
    embb_pct: float
    updates: int

    def row(self) -> list:
        return [getattr(self, f) for f in METRIC_FIELDS]


@dataclass
class TrainingResult:
    agent: DDPGAgent
    buffer: ReplayBuffer
    records: list = field(default_factory=list)

    @property
    def rewards(self) -> np.ndarray:
        return np.array([r.mean_reward for r in self.records])


def _pct(hits, total):
    return 100.0 * hits / total if total else math.nan


def shapley_targets(agent: DDPGAgent, snapshots, baseline, train: TrainConfig, seed: int, episode: int):
    """Monte-Carlo Shapley vectors for each ``(state, fleet)`` snapshot."""
    psi = []
    for j, (_, fleet) in enumerate(snapshots):
        report = explain_state(fleet, agent.policy, baseline, samples=train.shapley_samples,
                               horizon=train.rollout_horizon, gamma=train.gamma,
                               rollouts=train.rollout_count, seed=stream_key(seed, "shapley", episode, j))
        psi.append(report.values)
    return np.array(psi)


def run_training(env: VehicularEnv, agent: DDPGAgent, train: TrainConfig, seed: int,
                 buffer: Optional[ReplayBuffer] = None,
                 on_episode: Optional[Callable[[EpisodeRecord], None]] = None) -> TrainingResult:
    """Run ``train.episodes`` episodes of ``train.steps_per_episode`` slots.

    Gradient updates start once the buffer holds a full batch. For the ``sverl``
    variant every ``eval_interval``-th episode is a supervision episode: the
    episode before it snapshots ``explain_states`` random slots, their Shapley
    values are estimated under the policy at the start of the supervision
    episode, and every actor update of that episode uses the combined loss with
    these cached targets.
    """
    if buffer is None:
        buffer = ReplayBuffer(train.buffer_capacity, env.obs_dim, env.config.action_dim)
    noise_rng = stream(seed, "noise")
    replay_rng = stream(seed, "replay")
    pick_rng = stream(seed, "shapley")
    result = TrainingResult(agent, buffer)
    T = train.steps_per_episode
    K = train.batch_size
    explaining = agent.explain_weight > 0
    snapshots = []
    for episode in range(1, train.episodes + 1):
        sigma = train.noise_sigma(episode - 1)
        s = env.reset()
        targets = (None, None)
        if explaining and episode % train.eval_interval == 0 and snapshots and len(buffer) >= K:
            psi = shapley_targets(agent, snapshots, buffer.mean_state(), train, seed, episode)
            targets = (np.array([snap[0] for snap in snapshots]), psi)
        picks = set()
        if explaining and (episode + 1) % train.eval_interval == 0:
            picks = set(pick_rng.choice(T, size=min(train.explain_states, T), replace=False).tolist())
        snapshots = []
        total_reward = 0.0
        c_losses, a_losses, e_losses = [], [], []
        u_hit = u_tot = e_hit = e_tot = 0
        for t in range(T):
            if t in picks:
                snapshots.append((s.copy(), env.fleet.copy()))
            a = agent.act(s, sigma, noise_rng)
            out = env.step(a)
            buffer.add(s, a, out.reward * train.reward_scale, out.observation)
            total_reward += out.reward
            u_tot += int(out.s_urllc.sum())
            u_hit += int((out.s_urllc & ~out.urllc_violation).sum())
            e_tot += int(out.s_embb.sum())
            e_hit += int((out.s_embb & ~out.embb_violation).sum())
            if len(buffer) >= K and t % train.train_every == 0:
                c, al, ex = agent.train_batch(buffer, replay_rng, *targets)
                c_losses.append(c)
                a_losses.append(al)
                e_losses.append(ex)
            s = out.observation
        record = EpisodeRecord(
            episode=episode,
            mean_reward=total_reward / T,
            critic_loss=float(np.mean(c_losses)) if c_losses else math.nan,
            actor_loss=float(np.mean(a_losses)) if a_losses else math.nan,
            explain_loss=float(np.mean(e_losses)) if targets[0] is not None and e_losses else math.nan,
            noise_sigma=sigma,
            urllc_pct=_pct(u_hit, u_tot),
            embb_pct=_pct(e_hit, e_tot),
            updates=len(c_losses),
        )
        result.records.append(record)
        if on_episode is not None:
            on_episode(record)
    return result
