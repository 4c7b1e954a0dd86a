"""Actor with a softmax attention layer in front of an MLP body."""
from __future__ import annotations

import numpy as np

from ..nn import DenseNet


class AttentionActor:
    """``alpha = softmax(W s + b)``, ``s_tilde = alpha * s``, ``a = body(s_tilde)``.

    With ``learn_attention=False`` the attention layer is bypassed and alpha is the
    fixed uniform vector ``1/d``; the net then behaves as a plain DDPG actor.
    The body sees ``d * s_tilde`` so that uniform attention passes ``s`` through
    at its natural scale instead of shrinking every input by ``1/d``.
    """

    def __init__(self, attention: DenseNet, body: DenseNet, learn_attention: bool = True):
        d = body.in_dim
        if attention.shapes != [(d, d)] or attention.activations != ["softmax"]:
            raise ValueError("attention must be a single d x d softmax layer")
        self.attention = attention
        self.body = body
        self.learn_attention = learn_attention

    @classmethod
    def create(cls, obs_dim, action_dim, hidden, rng, learn_attention=True):
        attention = DenseNet.create([obs_dim, obs_dim], ["softmax"], rng)
        body = DenseNet.create([obs_dim, *hidden, action_dim], ["relu"] * len(hidden) + ["sigmoid"], rng)
        return cls(attention, body, learn_attention)

    @property
    def obs_dim(self) -> int:
        return self.body.in_dim

    @property
    def action_dim(self) -> int:
        return self.body.out_dim

    def params(self) -> list:
        return self.attention.params() + self.body.params()

    @property
    def n_attention_params(self) -> int:
        return len(self.attention.params())

    def copy(self) -> "AttentionActor":
        return AttentionActor(self.attention.copy(), self.body.copy(), self.learn_attention)

    def attention_forward(self, s):
        """Return ``(alpha, alpha * s)`` for one state or a batch."""
        s = np.asarray(s, dtype=np.float64)
        if s.shape[-1] != self.obs_dim:
            raise ValueError(f"state dimension {s.shape[-1]} does not match actor input {self.obs_dim}")
        if self.learn_attention:
            alpha = self.attention(s)
        else:
            alpha = np.full(s.shape, 1.0 / self.obs_dim)
        return alpha, alpha * s

    def forward(self, s):
        s = np.asarray(s, dtype=np.float64)
        if self.learn_attention:
            alpha, att_cache = self.attention.forward(s)
        else:
            alpha, att_cache = np.full(s.shape, 1.0 / self.obs_dim), None
        action, body_cache = self.body.forward(self.obs_dim * alpha * s)
        return action, (s, alpha, att_cache, body_cache)

    def __call__(self, s):
        return self.forward(s)[0]

    def backward(self, cache, grad_action, grad_alpha=None):
        """Parameter gradients of ``sum(grad_action * a) + sum(grad_alpha * alpha)``.

        Attention gradients are None when attention is not learned.
        """
        s, alpha, att_cache, body_cache = cache
        body_grads, g_tilde = self.body.backward(body_cache, grad_action)
        if not self.learn_attention:
            return [None] * self.n_attention_params + body_grads
        g_alpha = self.obs_dim * g_tilde * s
        if grad_alpha is not None:
            g_alpha = g_alpha + grad_alpha
        att_grads, _ = self.attention.backward(att_cache, g_alpha)
        return att_grads + body_grads
