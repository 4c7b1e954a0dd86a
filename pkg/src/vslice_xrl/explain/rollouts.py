"""Characteristic function of the feature game via masked-policy rollouts.

``v(C)`` is the discounted return over ``horizon`` slots when the policy sees the
true observation only on the features in ``C`` and the masking baseline
elsewhere, while the environment itself evolves on the true state. All
coalitions share the same mobility draws per rollout index (common random
numbers), so coalition differences reflect the policy and not the road noise.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from ..env.simulator import FleetBatch
from .shapley import ShapleyReport, mask_state, shapley_exact, shapley_mc

MAX_ROLLOUT_BATCH = 4096


def _rollout_streams(seed, k):
    base = np.random.SeedSequence(seed)
    return [np.random.default_rng(child) for child in base.spawn(k)]


def characteristic_values(fleet: FleetBatch, masks, policy: Callable, baseline, horizon: int,
                          gamma: float, rollouts: int, seed) -> np.ndarray:
    """Truncated discounted return for every coalition row of ``masks``.

    ``fleet`` is a single-copy snapshot of the environment at the explained state;
    ``policy`` maps a (B, d) observation batch to a (B, 2NM) action batch.
    """
    masks = np.atleast_2d(np.asarray(masks, dtype=bool))
    n = masks.shape[0]
    if fleet.size != 1:
        raise ValueError("characteristic_values expects a single-copy fleet snapshot")
    if horizon == 0:
        return np.zeros(n)
    cfg = fleet.config
    N, M = cfg.num_vehicles, cfg.num_gnbs
    k = int(rollouts)
    # mobility draws are action-independent: pre-draw them per rollout index
    draws = []
    for rng in _rollout_streams(seed, k):
        steps = []
        for _ in range(horizon):
            u_turn, u_spawn = rng.random(N), rng.random(N)
            shadow = rng.normal(0.0, cfg.shadowing_db, size=(N, M)) if cfg.shadowing_db > 0 else None
            steps.append((u_turn, u_spawn, shadow))
        draws.append(steps)
    out = np.empty(n)
    per_chunk = max(1, MAX_ROLLOUT_BATCH // k)
    for start in range(0, n, per_chunk):
        chunk = masks[start:start + per_chunk]
        c = chunk.shape[0]
        batch = fleet.repeat(c * k)
        mask_rep = np.repeat(chunk, k, axis=0)
        ret = np.zeros(c * k)
        disc = 1.0
        for t in range(horizon):
            obs = batch.observe()
            act = np.asarray(policy(mask_state(obs, mask_rep, baseline)), dtype=np.float64)
            q = act[:, :N * M].reshape(-1, N, M)
            b = act[:, N * M:].reshape(-1, N, M)
            reward = batch.apply(q, b)[-1]
            ret += disc * reward
            disc *= gamma
            u_turn = np.tile(np.stack([d[t][0] for d in draws]), (c, 1))
            u_spawn = np.tile(np.stack([d[t][1] for d in draws]), (c, 1))
            shadow = None
            if cfg.shadowing_db > 0:
                shadow = np.tile(np.stack([d[t][2] for d in draws]), (c, 1, 1))
            batch.move(u_turn, u_spawn, shadow)
        out[start:start + c] = ret.reshape(c, k).mean(axis=1)
    return out


class RolloutGame:
    """Callable game ``masks -> v(C)`` bound to one explained state."""

    def __init__(self, fleet, policy, baseline, horizon, gamma, rollouts, seed):
        self.fleet = fleet.copy()
        self.policy = policy
        self.baseline = np.asarray(baseline, dtype=float)
        self.horizon = horizon
        self.gamma = gamma
        self.rollouts = rollouts
        self.seed = seed

    @property
    def num_features(self) -> int:
        return self.fleet.config.obs_dim

    def __call__(self, masks):
        return characteristic_values(self.fleet, masks, self.policy, self.baseline, self.horizon,
                                     self.gamma, self.rollouts, self.seed)


def explain_state(fleet, policy, baseline, *, samples, horizon=10, gamma=0.99, rollouts=3, seed=0,
                  exact=False) -> ShapleyReport:
    """Shapley values of every observation feature at the state held by ``fleet``."""
    game = RolloutGame(fleet, policy, baseline, horizon, gamma, rollouts, seed)
    d = game.num_features
    if exact:
        report = shapley_exact(game, d)
    else:
        # spawn key disjoint from the rollout streams
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1 << 30,)))
        report = shapley_mc(game, d, samples, rng)
    report.horizon = horizon
    report.gamma = gamma
    report.baseline = game.baseline
    report.meta["rollouts"] = rollouts
    return report
