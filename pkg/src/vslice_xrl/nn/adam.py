"""Adam optimizer over lists of numpy parameter arrays."""
import numpy as np


class Adam:
    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params, grads):
        """In-place update of ``params``; entries of ``grads`` may be None (skipped)."""
        if len(params) != len(self.m):
            raise ValueError("parameter list does not match optimizer state")
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            if g is None:
                continue
            if g.shape != p.shape:
                raise ValueError(f"gradient shape {g.shape} does not match parameter {p.shape}")
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def state_dict(self) -> dict:
        return {
            "lr": self.lr, "beta1": self.beta1, "beta2": self.beta2, "eps": self.eps, "t": self.t,
            "m": [a.ravel().tolist() for a in self.m],
            "v": [a.ravel().tolist() for a in self.v],
        }

    def load_state_dict(self, state: dict):
        self.lr, self.beta1, self.beta2, self.eps = state["lr"], state["beta1"], state["beta2"], state["eps"]
        self.t = int(state["t"])
        self.m = [np.array(a, dtype=np.float64).reshape(ref.shape) for a, ref in zip(state["m"], self.m)]
        self.v = [np.array(a, dtype=np.float64).reshape(ref.shape) for a, ref in zip(state["v"], self.v)]
