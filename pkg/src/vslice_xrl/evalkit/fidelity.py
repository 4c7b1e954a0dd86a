"""Explanation fidelity: does claimed importance track measured sensitivity?"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def pearson(x, y) -> float:
    """Pearson correlation; NaN when either input has zero variance."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.ptp(x) == 0 or np.ptp(y) == 0:
        return float("nan")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = np.sqrt(np.sum(xc * xc))
    sy = np.sqrt(np.sum(yc * yc))
    if sx == 0 or sy == 0:
        return float("nan")
    return float(np.clip(np.sum(xc * yc) / (sx * sy), -1.0, 1.0))


@dataclass
class FidelityReport:
    correlations: np.ndarray  # NaN for skipped states
    delta: np.ndarray
    skipped: int

    @property
    def n_states(self) -> int:
        return len(self.correlations)

    @property
    def mean(self) -> float:
        valid = self.correlations[~np.isnan(self.correlations)]
        return float(valid.mean()) if valid.size else float("nan")


def perturbation_response(actor, s, delta) -> np.ndarray:
    """``|| actor(s + delta_i e_i) - actor(s) ||_2`` for every feature i."""
    s = np.asarray(s, dtype=float)
    base = actor(s)
    perturbed = s[None, :] + np.diag(np.broadcast_to(delta, s.shape))
    return np.linalg.norm(actor(perturbed) - base[None, :], axis=1)


def fidelity_pearson(actor, states, delta=None) -> FidelityReport:
    """Per-state Pearson r between attention weights and perturbation responses.

    ``delta`` defaults to the per-feature standard deviation over ``states``.
    States whose importance or response vector is constant are skipped.
    """
    states = np.atleast_2d(np.asarray(states, dtype=float))
    if delta is None:
        delta = states.std(axis=0)
    delta = np.broadcast_to(np.asarray(delta, dtype=float), (states.shape[1],)).copy()
    rs = []
    for s in states:
        alpha, _ = actor.attention_forward(s)
        rs.append(pearson(alpha, perturbation_response(actor, s, delta)))
    rs = np.array(rs)
    return FidelityReport(correlations=rs, delta=delta, skipped=int(np.isnan(rs).sum()))
