"""Dense feed-forward networks with hand-written backward passes.

Inputs are batch-first: ``x`` is (batch, in_dim) or a single (in_dim,) vector.
Weights are stored (in_dim, out_dim) so a layer computes ``act(x @ W + b)``.
"""
from __future__ import annotations

import numpy as np

ACTIVATIONS = ("relu", "sigmoid", "softmax", "identity")


def softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def sigmoid(z):
    # split by sign to avoid overflow in exp
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _activate(kind, z):
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "sigmoid":
        return sigmoid(z)
    if kind == "softmax":
        return softmax(z)
    return z


def _activation_grad(kind, z, y, g):
    """dL/dz given dL/dy for the activation ``y = act(z)``."""
    if kind == "relu":
        return g * (z > 0)
    if kind == "sigmoid":
        return g * y * (1.0 - y)
    if kind == "softmax":
        return y * (g - np.sum(g * y, axis=-1, keepdims=True))
    return g


class DenseNet:
    """Stack of fully connected layers.

    ``layers`` is a list of ``(W, b, activation)`` triples. Build a freshly
    initialized net with :meth:`create`.
    """

    def __init__(self, layers):
        self.weights = []
        self.biases = []
        self.activations = []
        prev = None
        for W, b, act in layers:
            W = np.array(W, dtype=np.float64)
            b = np.array(b, dtype=np.float64)
            if act not in ACTIVATIONS:
                raise ValueError(f"unknown activation {act!r}")
            if W.ndim != 2 or b.shape != (W.shape[1],):
                raise ValueError("weight must be (in, out) and bias (out,)")
            if prev is not None and W.shape[0] != prev:
                raise ValueError(f"layer input {W.shape[0]} does not match previous output {prev}")
            prev = W.shape[1]
            self.weights.append(W)
            self.biases.append(b)
            self.activations.append(act)

    @classmethod
    def create(cls, sizes, activations, rng, init_scale=None):
        """Uniform fan-in initialization: U(-1/sqrt(fan_in), 1/sqrt(fan_in))."""
        if len(activations) != len(sizes) - 1:
            raise ValueError("need one activation per layer")
        layers = []
        for k, act in enumerate(activations):
            fan_in, fan_out = sizes[k], sizes[k + 1]
            bound = 1.0 / np.sqrt(fan_in)
            if init_scale is not None and k == len(activations) - 1:
                bound = init_scale
            W = rng.uniform(-bound, bound, size=(fan_in, fan_out))
            b = rng.uniform(-bound, bound, size=fan_out)
            layers.append((W, b, act))
        return cls(layers)

    # -- structure ---------------------------------------------------------

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[1]

    @property
    def shapes(self):
        return [W.shape for W in self.weights]

    def params(self) -> list:
        """Parameter arrays in a fixed order (W0, b0, W1, b1, ...). Mutable views."""
        out = []
        for W, b in zip(self.weights, self.biases):
            out += [W, b]
        return out

    @property
    def num_params(self) -> int:
        return sum(p.size for p in self.params())

    def flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params()])

    def set_flat(self, vec):
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (self.num_params,):
            raise ValueError("flat parameter vector has the wrong length")
        pos = 0
        for p in self.params():
            p[...] = vec[pos:pos + p.size].reshape(p.shape)
            pos += p.size

    def copy(self) -> "DenseNet":
        return DenseNet([(W.copy(), b.copy(), a) for W, b, a in zip(self.weights, self.biases, self.activations)])

    def same_architecture(self, other: "DenseNet") -> bool:
        return self.shapes == other.shapes and self.activations == other.activations

    # -- passes ------------------------------------------------------------

    def forward(self, x):
        """Returns ``(output, cache)``; the cache feeds :meth:`backward`."""
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        h = x[None] if single else x
        if h.shape[1] != self.in_dim:
            raise ValueError(f"input dimension {h.shape[1]} does not match network input {self.in_dim}")
        inputs, pre, post = [], [], []
        for W, b, act in zip(self.weights, self.biases, self.activations):
            inputs.append(h)
            z = h @ W + b
            h = _activate(act, z)
            pre.append(z)
            post.append(h)
        cache = (single, inputs, pre, post)
        return (h[0] if single else h), cache

    def __call__(self, x):
        return self.forward(x)[0]

    def backward(self, cache, grad_out):
        """Gradients of ``sum(grad_out * output)``.

        Returns ``(param_grads, grad_input)`` with ``param_grads`` ordered like
        :meth:`params`. Gradients are summed over the batch.
        """
        single, inputs, pre, post = cache
        g = np.asarray(grad_out, dtype=np.float64)
        if single:
            g = g[None]
        if g.shape != post[-1].shape:
            raise ValueError(f"output gradient shape {g.shape} does not match output {post[-1].shape}")
        grads = [None] * (2 * len(self.weights))
        for k in range(len(self.weights) - 1, -1, -1):
            dz = _activation_grad(self.activations[k], pre[k], post[k], g)
            grads[2 * k] = inputs[k].T @ dz
            grads[2 * k + 1] = dz.sum(axis=0)
            g = dz @ self.weights[k].T
        return grads, (g[0] if single else g)


def soft_update(target: DenseNet, source: DenseNet, tau: float) -> DenseNet:
    """Polyak averaging ``target <- tau * source + (1 - tau) * target`` in place."""
    if not target.same_architecture(source):
        raise ValueError("soft_update needs identical architectures")
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    for pt, ps in zip(target.params(), source.params()):
        pt *= 1.0 - tau
        pt += tau * ps
    return target
