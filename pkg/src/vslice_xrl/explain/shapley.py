"""Shapley values of cooperative games over state features.

A game is any callable ``value_fn(masks) -> values`` taking a boolean matrix of
coalitions (one row per coalition, one column per feature) and returning one
value per row. Feature indices are zero-based here.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Callable, Optional

import numpy as np

from .._accel import USE_NUMBA, njit

MAX_EXACT_FEATURES = 12
NORMALIZE_EPS = 1e-12


@dataclass
class ShapleyReport:
    values: np.ndarray
    kind: str  # "exact" or "monte-carlo"
    samples: Optional[int] = None
    stderr: Optional[np.ndarray] = None
    horizon: Optional[int] = None
    gamma: Optional[float] = None
    baseline: Optional[np.ndarray] = None
    grand_value: Optional[float] = None
    empty_value: Optional[float] = None
    meta: dict = field(default_factory=dict)

    @property
    def normalized(self) -> np.ndarray:
        return normalize_importance(self.values)


def mask_state(s, coalition, baseline):
    """Keep features in ``coalition`` and replace the rest by ``baseline``.

    ``coalition`` is a boolean mask or a sequence of zero-based indices; ``s`` may
    carry leading batch dimensions.
    """
    s = np.asarray(s, dtype=float)
    baseline = np.asarray(baseline, dtype=float)
    d = s.shape[-1]
    if baseline.shape[-1] != d:
        raise ValueError(f"baseline dimension {baseline.shape[-1]} does not match state dimension {d}")
    mask = np.asarray(coalition)
    if mask.dtype != bool:
        idx = mask.astype(int).ravel()
        if idx.size and (idx.min() < 0 or idx.max() >= d or np.unique(idx).size != idx.size):
            raise ValueError("coalition indices must be unique and within [0, d)")
        mask = np.zeros(d, dtype=bool)
        mask[idx] = True
    elif mask.shape[-1] != d:
        raise ValueError(f"coalition mask dimension {mask.shape[-1]} does not match state dimension {d}")
    return np.where(mask, s, baseline)


def normalize_importance(v):
    """``|v_i| / (sum_k |v_k| + eps)``; all-zero input maps to all zeros."""
    a = np.abs(np.asarray(v, dtype=float))
    return a / (a.sum(axis=-1, keepdims=True) + NORMALIZE_EPS)


def explanation_loss(alpha, psi):
    """Mean over states of ``(1/d) sum_i (alpha_hat_i - psi_hat_i)^2``.

    ``alpha`` and ``psi`` have shape (d,) or (n_states, d); psi is a constant target.
    Returns ``(loss, dloss_dalpha)``.
    """
    alpha = np.atleast_2d(np.asarray(alpha, dtype=float))
    psi_hat = normalize_importance(np.atleast_2d(psi))
    n, d = alpha.shape
    abs_a = np.abs(alpha)
    denom = abs_a.sum(axis=1, keepdims=True) + NORMALIZE_EPS
    a_hat = abs_a / denom
    diff = a_hat - psi_hat
    loss = float(np.mean(np.sum(diff ** 2, axis=1) / d))
    g_hat = 2.0 * diff / (d * n)
    # through |a| / (sum|a| + eps)
    g_abs = g_hat / denom - np.sum(g_hat * abs_a, axis=1, keepdims=True) / denom ** 2
    return loss, g_abs * np.sign(alpha)


# ---------------------------------------------------------------- exact


def _coalition_weights(d):
    return np.array([factorial(k) * factorial(d - k - 1) / factorial(d) for k in range(d)])


def all_masks(d) -> np.ndarray:
    """Every coalition as a boolean row; row ``k`` has bit ``j`` of ``k`` in column ``j``."""
    k = np.arange(2 ** d)[:, None]
    return ((k >> np.arange(d)) & 1).astype(bool)


def _combine_numpy(table, d, weights):
    k = np.arange(2 ** d)
    sizes = np.array([bin(x).count("1") for x in range(2 ** d)])
    psi = np.zeros(d)
    for i in range(d):
        without = k[(k >> i) & 1 == 0]
        psi[i] = np.sum(weights[sizes[without]] * (table[without | (1 << i)] - table[without]))
    return psi


@njit
def _combine_loop(table, d, weights):
    psi = np.zeros(d)
    n = 1 << d
    for c in range(n):
        size = 0
        x = c
        while x:
            size += x & 1
            x >>= 1
        for i in range(d):
            if not (c >> i) & 1:
                psi[i] += weights[size] * (table[c | (1 << i)] - table[c])
    return psi


combine_table = _combine_loop if USE_NUMBA else _combine_numpy


def shapley_exact(value_fn: Callable, d: int) -> ShapleyReport:
    """Exact Shapley values by enumerating all ``2**d`` coalitions."""
    if d > MAX_EXACT_FEATURES:
        raise ValueError(
            f"exact enumeration needs d ≤ {MAX_EXACT_FEATURES} (got {d}); use shapley_mc instead"
        )
    if d < 1:
        raise ValueError("need at least one feature")
    table = np.asarray(value_fn(all_masks(d)), dtype=np.float64)
    psi = combine_table(table, d, _coalition_weights(d))
    return ShapleyReport(values=psi, kind="exact", grand_value=float(table[-1]), empty_value=float(table[0]))


# ---------------------------------------------------------------- Monte Carlo


def permutation_coalitions(perms: np.ndarray) -> np.ndarray:
    """Prefix coalitions of each permutation, shape (n_perm, d + 1, d).

    Row ``j`` of permutation ``p`` holds the first ``j`` features of ``p``.
    """
    n, d = perms.shape
    rank = np.empty_like(perms)
    rows = np.arange(n)[:, None]
    rank[rows, perms] = np.arange(d)
    return rank[:, None, :] < np.arange(d + 1)[None, :, None]


def shapley_mc(value_fn: Callable, d: int, samples: int, rng, chunk: Optional[int] = None) -> ShapleyReport:
    """Monte-Carlo Shapley values from ``samples`` uniform random permutations.

    For every feature the prefix before it in a random permutation is a coalition
    drawn with the exact Shapley weights, so each permutation gives one unbiased
    marginal ``v(C u {i}) - v(C)`` per feature. The empty and full coalitions are
    shared by every permutation and evaluated once.
    """
    if samples < 1:
        raise ValueError("samples must be ≥ 1")
    perms = np.argsort(rng.random((samples, d)), axis=1)
    prefixes = permutation_coalitions(perms)
    inner = prefixes[:, 1:d].reshape(-1, d)
    masks = np.concatenate([np.zeros((1, d), bool), np.ones((1, d), bool), inner])
    if chunk is None:
        values = np.asarray(value_fn(masks), dtype=float)
    else:
        values = np.concatenate([np.asarray(value_fn(masks[k:k + chunk]), dtype=float)
                                 for k in range(0, len(masks), chunk)])
    v_empty, v_full = values[0], values[1]
    chain = np.empty((samples, d + 1))
    chain[:, 0] = v_empty
    chain[:, d] = v_full
    chain[:, 1:d] = values[2:].reshape(samples, d - 1)
    step = np.diff(chain, axis=1)  # step[p, j] is the marginal of feature perms[p, j]
    marginals = np.empty_like(step)
    marginals[np.arange(samples)[:, None], perms] = step
    psi = marginals.mean(axis=0)
    if samples > 1:
        stderr = marginals.std(axis=0, ddof=1) / np.sqrt(samples)
    else:
        stderr = np.full(d, np.inf)
    return ShapleyReport(values=psi, kind="monte-carlo", samples=samples, stderr=stderr,
                         grand_value=float(v_full), empty_value=float(v_empty))
