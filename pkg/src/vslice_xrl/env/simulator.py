"""Discrete-time vehicular slicing environment.

:class:`FleetBatch` holds B independent copies of the world as arrays and steps
them together through the kernels in :mod:`.kernels`. :class:`VehicularEnv` is
the single-copy environment used for training and evaluation; it owns the RNG
and can spawn a :class:`FleetBatch` of clones for Shapley rollouts.

Observation layout (all entries in [0, 1]), per vehicle i = 1..N::

    x, y, demand, s_urllc, s_embb, active,
    q_prev[1..M], prb[1..M], gain[1..M],
    x_next, y_next, speed

followed by ``load[1..M]``, for a length of ``N * (9 + 3M) + M``.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from ..config import NetworkConfig
from . import kernels
from .channel import gain_matrix
from .projection import RelaxedAction, FeasibleAllocation, validate_relaxed
from .roads import gnb_layout, road_coordinates, to_xy

SERVICE_COMBOS = np.array([[True, False], [False, True], [True, True]])


def feature_names(config: NetworkConfig) -> list[str]:
    M = config.num_gnbs
    names = []
    for i in range(1, config.num_vehicles + 1):
        v = f"v{i}."
        names += [v + "x", v + "y", v + "demand", v + "s_urllc", v + "s_embb", v + "active"]
        names += [f"{v}q_prev{m}" for m in range(1, M + 1)]
        names += [f"{v}prb{m}" for m in range(1, M + 1)]
        names += [f"{v}gain{m}" for m in range(1, M + 1)]
        names += [v + "x_next", v + "y_next", v + "speed"]
    names += [f"gnb{m}.load" for m in range(1, M + 1)]
    return names


@dataclass
class StepOutcome:
    observation: np.ndarray
    reward: float
    allocation: FeasibleAllocation
    rate: np.ndarray
    delay: np.ndarray
    urllc_penalty: np.ndarray
    embb_penalty: np.ndarray
    s_urllc: np.ndarray
    s_embb: np.ndarray
    active: np.ndarray
    respawned: np.ndarray

    @property
    def urllc_violation(self) -> np.ndarray:
        return self.active & self.s_urllc & (self.urllc_penalty > 0)

    @property
    def embb_violation(self) -> np.ndarray:
        return self.active & self.s_embb & (self.embb_penalty > 0)


class FleetBatch:
    """B copies of the vehicle fleet plus per-copy association history."""

    def __init__(self, config: NetworkConfig, arrays: dict):
        self.config = config
        self.gnbs = gnb_layout(config)
        self.cross = road_coordinates(config.area_side)
        self.capacity = np.full(config.num_gnbs, config.prbs_per_gnb, dtype=np.int64)
        for name in ("axis", "lane", "along", "heading", "turn", "s_urllc", "s_embb",
                     "active", "prev_assoc", "alloc", "gains"):
            setattr(self, name, arrays[name])
        self._link_params = (
            float(config.tx_power), float(config.noise_power), float(config.prb_bandwidth),
            float(config.fixed_delay), float(config.urllc_delay_max), float(config.embb_rate_min),
            float(config.penalty_cap), float(config.w_urllc), float(config.w_embb),
        )
        dist = config.vehicle_speed * config.slot_duration
        if dist >= config.area_side / 3.0:
            raise ValueError("vehicle_speed * slot_duration must be shorter than the road spacing")
        self._dist = float(dist)
        far = np.sqrt(2.0) * config.area_side
        self._log_gmin = -config.pathloss_exponent * np.log10(far / config.reference_distance)
        self._log_gmax = -config.pathloss_exponent * np.log10(
            max(config.gain_norm_distance, config.reference_distance) / config.reference_distance)

    _ARRAYS = ("axis", "lane", "along", "heading", "turn", "s_urllc", "s_embb",
               "active", "prev_assoc", "alloc", "gains")

    @property
    def size(self) -> int:
        return self.axis.shape[0]

    def arrays(self) -> dict:
        return {name: getattr(self, name) for name in self._ARRAYS}

    def copy(self) -> "FleetBatch":
        return FleetBatch(self.config, {k: v.copy() for k, v in self.arrays().items()})

    def repeat(self, copies: int) -> "FleetBatch":
        """Batch with every copy repeated ``copies`` times (copy-major order)."""
        return FleetBatch(self.config, {k: np.repeat(v, copies, axis=0) for k, v in self.arrays().items()})

    # -- derived quantities -------------------------------------------------

    @property
    def demand(self) -> np.ndarray:
        return np.where(self.active & self.s_urllc, self.config.urllc_demand, 0.0)

    def positions(self) -> np.ndarray:
        return to_xy(self.axis, self.lane, self.along)

    def next_positions(self) -> np.ndarray:
        """Position one slot ahead under the pending turn choice (clamped at the border)."""
        a, l, s, _, _ = kernels.advance_numpy(self.axis, self.lane, self.along, self.heading,
                                              self.turn, self._dist, self.cross)
        return to_xy(a, l, np.clip(s, 0.0, self.config.area_side))

    def loads(self) -> np.ndarray:
        return self.alloc.sum(axis=1) / self.capacity

    def refresh_gains(self, shadow_db=None):
        g = gain_matrix(self.positions(), self.gnbs, self.config)
        if shadow_db is not None:
            g = np.minimum(g * 10.0 ** (shadow_db / 10.0), 1.0)
        self.gains = g

    def observe(self) -> np.ndarray:
        """Observation matrix of shape (B, d)."""
        cfg = self.config
        B, N = self.axis.shape
        M = cfg.num_gnbs
        A = cfg.area_side
        pos = self.positions() / A
        nxt = self.next_positions() / A
        onehot = (self.prev_assoc[..., None] == np.arange(M)).astype(float)
        prb = self.alloc / self.capacity
        with np.errstate(divide="ignore"):
            lg = np.log10(self.gains)
        gain = np.clip((lg - self._log_gmin) / (self._log_gmax - self._log_gmin), 0.0, 1.0)
        active = self.active.astype(float)
        speed = np.broadcast_to(active * cfg.vehicle_speed / cfg.speed_norm, (B, N))
        per_vehicle = np.concatenate(
            [
                pos,
                (self.demand / cfg.urllc_demand)[..., None],
                self.s_urllc[..., None].astype(float),
                self.s_embb[..., None].astype(float),
                active[..., None],
                onehot,
                prb,
                gain,
                nxt,
                speed[..., None],
            ],
            axis=2,
        )
        return np.concatenate([per_vehicle.reshape(B, -1), self.loads()], axis=1)

    # -- dynamics ----------------------------------------------------------

    def apply(self, q, b):
        """Project, evaluate links and record the allocation (no movement)."""
        q = np.ascontiguousarray(q, dtype=np.float64)
        b = np.ascontiguousarray(b, dtype=np.float64)
        assoc, prbs = kernels.project(q, b, self.active, self.capacity)
        rate, dly, pen_u, pen_e, reward = kernels.links(
            self.gains, assoc, prbs, self.demand, self.s_urllc, self.s_embb, self.active,
            self._link_params)
        self.prev_assoc = assoc
        self.alloc = prbs
        return assoc, prbs, rate, dly, pen_u, pen_e, reward

    def move(self, u_turn, u_spawn, shadow_db=None) -> np.ndarray:
        exited = kernels.move(self.axis, self.lane, self.along, self.heading, self.turn,
                              np.ascontiguousarray(u_turn, dtype=np.float64),
                              np.ascontiguousarray(u_spawn, dtype=np.float64),
                              self._dist, float(self.config.area_side), self.cross)
        self.refresh_gains(shadow_db)
        return exited


class VehicularEnv:
    """Single vehicular slicing environment with its own RNG stream."""

    def __init__(self, config: NetworkConfig, seed=0):
        if not isinstance(config, NetworkConfig):
            raise TypeError("config must be a NetworkConfig")
        self.config = config
        self.rng = np.random.default_rng(seed)
        self.slot = 0
        self.fleet = self._spawn()

    @property
    def obs_dim(self) -> int:
        return self.config.obs_dim

    def _shadow(self, batch_shape):
        if self.config.shadowing_db <= 0:
            return None
        return self.rng.normal(0.0, self.config.shadowing_db, size=batch_shape + (self.config.num_gnbs,))

    def _spawn(self) -> FleetBatch:
        cfg = self.config
        N, M = cfg.num_vehicles, cfg.num_gnbs
        cross = road_coordinates(cfg.area_side)
        road = self.rng.integers(0, 4, size=N)
        arrays = dict(
            axis=(road // 2).astype(np.int64)[None],
            lane=cross[road % 2][None].astype(np.float64),
            along=self.rng.uniform(0.0, cfg.area_side, size=N)[None],
            heading=self.rng.choice(np.array([-1, 1], dtype=np.int64), size=N)[None],
            turn=self.rng.integers(0, kernels.N_TURNS, size=N).astype(np.int64)[None],
        )
        flags = SERVICE_COMBOS[self.rng.integers(0, 3, size=N)]
        arrays.update(
            s_urllc=flags[None, :, 0].copy(),
            s_embb=flags[None, :, 1].copy(),
            active=np.ones((1, N), dtype=bool),
            prev_assoc=np.full((1, N), -1, dtype=np.int64),
            alloc=np.zeros((1, N, M), dtype=np.int64),
            gains=np.zeros((1, N, M)),
        )
        fleet = FleetBatch(cfg, arrays)
        fleet.refresh_gains(self._shadow((1, N)))
        return fleet

    def reset(self) -> np.ndarray:
        self.slot = 0
        self.fleet = self._spawn()
        return self.assemble_state()

    def assemble_state(self) -> np.ndarray:
        return self.fleet.observe()[0]

    def clone(self) -> "VehicularEnv":
        """Independent copy, RNG state included."""
        return copy.deepcopy(self)

    def draw_mobility(self, batch_shape):
        """Uniform draws consumed by one mobility update."""
        return self.rng.random(batch_shape), self.rng.random(batch_shape)

    def advance_mobility(self) -> np.ndarray:
        """Move every vehicle one slot; returns the re-spawn mask."""
        N = self.config.num_vehicles
        u_turn, u_spawn = self.draw_mobility((1, N))
        return self.fleet.move(u_turn, u_spawn, self._shadow((1, N)))[0]

    def step(self, action) -> StepOutcome:
        q, b = validate_relaxed(action, self.config)
        assoc, prbs, rate, dly, pen_u, pen_e, reward = self.fleet.apply(q[None], b[None])
        s_u = self.fleet.s_urllc[0].copy()
        s_e = self.fleet.s_embb[0].copy()
        active = self.fleet.active[0].copy()
        respawned = self.advance_mobility()
        self.slot += 1
        return StepOutcome(
            observation=self.assemble_state(),
            reward=float(reward[0]),
            allocation=FeasibleAllocation.from_arrays(assoc[0], prbs[0], self.config.num_gnbs),
            rate=rate[0],
            delay=dly[0],
            urllc_penalty=pen_u[0],
            embb_penalty=pen_e[0],
            s_urllc=s_u,
            s_embb=s_e,
            active=active,
            respawned=respawned,
        )

    # convenience views of the single copy
    @property
    def positions(self) -> np.ndarray:
        return self.fleet.positions()[0]

    @property
    def next_positions(self) -> np.ndarray:
        return self.fleet.next_positions()[0]

    @property
    def service_flags(self) -> np.ndarray:
        return np.stack([self.fleet.s_urllc[0], self.fleet.s_embb[0]], axis=1)


def build_environment(config: NetworkConfig, seed: int = 0) -> VehicularEnv:
    return VehicularEnv(config, seed)
