"""Relaxed actions and their projection onto feasible PRB allocations."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


class InvalidActionError(ValueError):
    pass


@dataclass(frozen=True)
class RelaxedAction:
    """Association scores ``q`` and PRB fractions ``b``, both (N, M) in [0, 1]."""

    q: np.ndarray
    b: np.ndarray

    @classmethod
    def from_vector(cls, vec, num_vehicles: int, num_gnbs: int) -> "RelaxedAction":
        """Split a flat ``2*N*M`` vector: first half q-scores, second half fractions."""
        vec = np.asarray(vec, dtype=float)
        n = num_vehicles * num_gnbs
        if vec.shape != (2 * n,):
            raise InvalidActionError(f"expected a flat action of length {2 * n}, got shape {vec.shape}")
        return cls(vec[:n].reshape(num_vehicles, num_gnbs), vec[n:].reshape(num_vehicles, num_gnbs))

    def to_vector(self) -> np.ndarray:
        return np.concatenate([np.ravel(self.q), np.ravel(self.b)])


@dataclass(frozen=True)
class FeasibleAllocation:
    """Binary association ``q`` (N, M) and integer PRB counts ``prbs`` (N, M)."""

    q: np.ndarray
    prbs: np.ndarray

    @classmethod
    def from_arrays(cls, assoc, prbs, num_gnbs: int) -> "FeasibleAllocation":
        q = (np.asarray(assoc)[:, None] == np.arange(num_gnbs)).astype(np.int64)
        return cls(q, np.asarray(prbs, dtype=np.int64))

    @property
    def association(self) -> np.ndarray:
        """Serving gNB index per vehicle (-1 when unassociated)."""
        return np.where(self.q.any(axis=1), self.q.argmax(axis=1), -1)


def validate_relaxed(action, config):
    """Return contiguous (q, b) arrays after shape, NaN and range checks."""
    shape = (config.num_vehicles, config.num_gnbs)
    if isinstance(action, RelaxedAction):
        q, b = action.q, action.b
    elif isinstance(action, tuple) and len(action) == 2:
        q, b = action
    else:
        ra = RelaxedAction.from_vector(action, *shape)
        q, b = ra.q, ra.b
    q = np.ascontiguousarray(q, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if q.shape != shape or b.shape != shape:
        raise InvalidActionError(f"action parts must have shape {shape}")
    if np.isnan(q).any() or np.isnan(b).any():
        raise InvalidActionError("action contains NaN")
    if q.min() < 0 or q.max() > 1 or b.min() < 0 or b.max() > 1:
        raise InvalidActionError("action entries must lie in [0, 1]")
    return q, b


def project_action(raw, config, active=None) -> FeasibleAllocation:
    """Map a relaxed action onto an allocation satisfying the capacity constraints.

    Each active vehicle joins the gNB with the highest score (ties go to the lowest
    index) and requests ``round(b * W)`` PRBs there, rounding halves up. When the
    requests on a gNB exceed its ``W`` PRBs, each is scaled by ``W / total`` and
    floored.
    """
    q, b = validate_relaxed(raw, config)
    if active is None:
        active = np.ones(config.num_vehicles, dtype=bool)
    capacity = np.full(config.num_gnbs, config.prbs_per_gnb, dtype=np.int64)
    assoc, prbs = kernels.project(q[None], b[None], np.asarray(active, dtype=bool)[None], capacity)
    return FeasibleAllocation.from_arrays(assoc[0], prbs[0], config.num_gnbs)
