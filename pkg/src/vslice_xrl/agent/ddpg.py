"""DDPG agent with an attention actor and Shapley-supervised attention."""
from __future__ import annotations

import math

import numpy as np

from ..config import TrainConfig
from ..explain.shapley import explanation_loss
from ..nn import Adam, DenseNet, net_from_dict, net_to_dict, soft_update
from .actor import AttentionActor
from .replay import ReplayBuffer

CHECKPOINT_FORMAT = "vslice-agent/1"


class DDPGAgent:
    """Actor-critic pair plus target copies and Adam optimizers.

    ``variant`` selects the ablation: ``ddpg`` freezes alpha at uniform,
    ``attention`` learns alpha from the DDPG loss only, ``sverl`` adds the
    weighted explanation loss on alpha.
    """

    def __init__(self, actor: AttentionActor, critic: DenseNet, train: TrainConfig):
        self.train_config = train
        self.actor = actor
        self.critic = critic
        self.actor_target = actor.copy()
        self.critic_target = critic.copy()
        self.actor_opt = Adam(actor.params(), lr=train.actor_lr)
        self.critic_opt = Adam(critic.params(), lr=train.critic_lr)

    @classmethod
    def create(cls, obs_dim: int, action_dim: int, train: TrainConfig, rng) -> "DDPGAgent":
        actor = AttentionActor.create(obs_dim, action_dim, train.hidden, rng,
                                      learn_attention=train.variant != "ddpg")
        n_hidden = len(train.hidden)
        critic = DenseNet.create([obs_dim + action_dim, *train.hidden, 1],
                                 ["relu"] * n_hidden + ["identity"], rng)
        return cls(actor, critic, train)

    @property
    def variant(self) -> str:
        return self.train_config.variant

    @property
    def explain_weight(self) -> float:
        return self.train_config.explain_weight if self.variant == "sverl" else 0.0

    # -- acting ------------------------------------------------------------

    def policy(self, states):
        """Noise-free actions for a state or a batch of states."""
        return self.actor(states)

    def act(self, s, sigma: float, rng) -> np.ndarray:
        a = self.actor(s)
        if sigma > 0:
            a = a + rng.normal(0.0, sigma, size=a.shape)
        return np.clip(a, 0.0, 1.0)

    def q_values(self, states, actions):
        return self.critic(np.concatenate([states, actions], axis=-1))[..., 0]

    # -- learning ----------------------------------------------------------

    def critic_update(self, s, a, r, s_next) -> float:
        gamma = self.train_config.gamma
        a_next = self.actor_target(s_next)
        target = r + gamma * self.critic_target(np.concatenate([s_next, a_next], axis=1))[:, 0]
        q, cache = self.critic.forward(np.concatenate([s, a], axis=1))
        err = q[:, 0] - target
        loss = float(np.mean(err ** 2))
        grads, _ = self.critic.backward(cache, (2.0 * err / len(err))[:, None])
        self.critic_opt.step(self.critic.params(), grads)
        return loss

    def actor_gradients(self, s, explain_states=None, psi=None, weight=None):
        """Gradients of ``L_ddpg + weight * L_explain`` w.r.t. the actor parameters.

        ``L_ddpg = -mean Q(s, actor(s))``. The explanation term only touches the
        attention layer, since alpha does not depend on the body. Returns
        ``(grads, ddpg_loss, explain_loss)``; explain_loss is None without targets.
        """
        d = self.actor.obs_dim
        a_pi, cache = self.actor.forward(s)
        q, ccache = self.critic.forward(np.concatenate([s, a_pi], axis=1))
        ddpg_loss = -float(np.mean(q))
        _, g_in = self.critic.backward(ccache, np.full(q.shape, -1.0 / len(q)))
        grads = self.actor.backward(cache, g_in[:, d:])
        explain = None
        if explain_states is not None and self.actor.learn_attention:
            weight = self.explain_weight if weight is None else weight
            alpha, att_cache = self.actor.attention.forward(np.atleast_2d(explain_states))
            explain, g_alpha = explanation_loss(alpha, psi)
            att_grads, _ = self.actor.attention.backward(att_cache, weight * g_alpha)
            n_att = self.actor.n_attention_params
            grads = [g + ga for g, ga in zip(grads[:n_att], att_grads)] + grads[n_att:]
        return grads, ddpg_loss, explain

    def actor_update(self, s, explain_states=None, psi=None):
        grads, ddpg_loss, explain = self.actor_gradients(s, explain_states, psi)
        self.actor_opt.step(self.actor.params(), grads)
        return ddpg_loss, explain

    def update_targets(self):
        tau = self.train_config.tau
        for tgt, src in ((self.actor_target.attention, self.actor.attention),
                         (self.actor_target.body, self.actor.body),
                         (self.critic_target, self.critic)):
            soft_update(tgt, src, tau)

    def train_batch(self, buffer: ReplayBuffer, rng, explain_states=None, psi=None):
        """One critic step, one actor step and a soft target update.

        With Shapley targets ``(explain_states, psi)`` the actor step uses
        ``L_ddpg + lambda * L_explain``. Returns ``(critic_loss, actor_loss,
        explain_loss)``; explain_loss is NaN without targets.
        """
        s, a, r, s_next = buffer.sample(self.train_config.batch_size, rng)
        critic_loss = self.critic_update(s, a, r, s_next)
        actor_loss, explain = self.actor_update(s, explain_states, psi)
        self.update_targets()
        return critic_loss, actor_loss, math.nan if explain is None else explain

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": CHECKPOINT_FORMAT,
            "train": self.train_config.to_dict(),
            "learn_attention": self.actor.learn_attention,
            "actor_attention": net_to_dict(self.actor.attention),
            "actor_body": net_to_dict(self.actor.body),
            "critic": net_to_dict(self.critic),
            "actor_target_attention": net_to_dict(self.actor_target.attention),
            "actor_target_body": net_to_dict(self.actor_target.body),
            "critic_target": net_to_dict(self.critic_target),
            "actor_opt": self.actor_opt.state_dict(),
            "critic_opt": self.critic_opt.state_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "DDPGAgent":
        if doc.get("format") != CHECKPOINT_FORMAT:
            raise ValueError(f"unsupported checkpoint format {doc.get('format')!r}")
        train = TrainConfig(**doc["train"])
        learn = bool(doc["learn_attention"])
        actor = AttentionActor(net_from_dict(doc["actor_attention"]), net_from_dict(doc["actor_body"]), learn)
        agent = cls(actor, net_from_dict(doc["critic"]), train)
        agent.actor_target = AttentionActor(net_from_dict(doc["actor_target_attention"]),
                                            net_from_dict(doc["actor_target_body"]), learn)
        agent.critic_target = net_from_dict(doc["critic_target"])
        agent.actor_opt.load_state_dict(doc["actor_opt"])
        agent.critic_opt.load_state_dict(doc["critic_opt"])
        return agent
