"""Configuration objects and the YAML config loader."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml


class ConfigError(ValueError):
    """Invalid configuration value or file."""


@dataclass(frozen=True)
class NetworkConfig:
    """Physical and QoS constants of the vehicular slicing scenario.

    Defaults are the reference scenario: 1 km x 1 km grid, 3 gNBs with 273 PRBs each,
    5 vehicles at 15 m/s, 50 dBm transmit power, 1.4e-15 W noise, 360 kHz PRBs,
    15 ms URLLC delay budget, 20 Mbit/s eMBB rate floor, path loss exponent 3.5 and
    3e5-bit URLLC demand per slot.
    """

    area_side: float = 1000.0
    num_gnbs: int = 3
    num_vehicles: int = 5
    prbs_per_gnb: int = 273
    tx_power_dbm: float = 50.0
    noise_power: float = 1.4e-15
    prb_bandwidth: float = 3.6e5
    urllc_delay_max: float = 0.015
    embb_rate_min: float = 20e6
    vehicle_speed: float = 15.0
    pathloss_exponent: float = 3.5
    urllc_demand: float = 3e5
    fixed_delay: float = 0.0015
    slot_duration: float = 1.0
    w_urllc: float = 1.0
    w_embb: float = 1.0
    # cap on a single normalized penalty term; keeps rewards finite when R = 0
    penalty_cap: float = 10.0
    reference_distance: float = 1.0
    shadowing_db: float = 0.0
    # observation normalizers
    speed_norm: float = 30.0
    gain_norm_distance: float = 10.0
    gnb_positions: Optional[tuple] = None

    def __post_init__(self):
        for name in ("num_gnbs", "num_vehicles", "prbs_per_gnb"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigError(f"{name} must be ≥ 1 (got {value!r})")
        for f in dataclasses.fields(self):
            if f.name in ("gnb_positions", "shadowing_db", "w_urllc", "w_embb"):
                continue
            value = getattr(self, f.name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{f.name} must be a finite positive number (got {value!r})")
        for name in ("shadowing_db", "w_urllc", "w_embb"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigError(f"{name} must be a finite non-negative number (got {value!r})")
        if self.urllc_delay_max <= self.fixed_delay:
            raise ConfigError(
                "urllc_delay_max must exceed fixed_delay, otherwise every URLLC slot is violated"
            )
        if self.speed_norm < self.vehicle_speed:
            raise ConfigError("speed_norm must be ≥ vehicle_speed")
        if self.gnb_positions is not None:
            pos = tuple(tuple(float(c) for c in p) for p in self.gnb_positions)
            if len(pos) != self.num_gnbs or any(len(p) != 2 for p in pos):
                raise ConfigError("gnb_positions must list one (x, y) pair per gNB")
            if any(not (0 <= c <= self.area_side) for p in pos for c in p):
                raise ConfigError("gnb_positions must lie inside the area")
            object.__setattr__(self, "gnb_positions", pos)

    @property
    def tx_power(self) -> float:
        """Transmit power in watts."""
        return 10.0 ** (self.tx_power_dbm / 10.0) / 1000.0

    @property
    def obs_dim(self) -> int:
        return self.num_vehicles * (9 + 3 * self.num_gnbs) + self.num_gnbs

    @property
    def action_dim(self) -> int:
        return 2 * self.num_vehicles * self.num_gnbs

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        if out["gnb_positions"] is not None:
            out["gnb_positions"] = [list(p) for p in out["gnb_positions"]]
        return out


VARIANTS = ("ddpg", "attention", "sverl")


@dataclass(frozen=True)
class TrainConfig:
    """Learning hyperparameters. All values are chosen defaults."""

    variant: str = "sverl"
    gamma: float = 0.99
    batch_size: int = 64
    tau: float = 0.005
    buffer_capacity: int = 100_000
    noise_sigma0: float = 0.2
    noise_sigma_min: float = 0.01
    noise_decay: float = 0.995
    episodes: int = 300
    steps_per_episode: int = 100
    explain_weight: float = 0.1
    eval_interval: int = 10
    shapley_samples: int = 32
    rollout_horizon: int = 10
    rollout_count: int = 3
    explain_states: int = 4
    critic_lr: float = 1e-3
    actor_lr: float = 1e-4
    hidden: tuple = (256, 128)
    reward_scale: float = 1.0
    train_every: int = 1

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS} (got {self.variant!r})")
        if not 0 < self.gamma < 1:
            raise ConfigError("gamma must lie in (0, 1)")
        if self.batch_size < 1 or self.batch_size > self.buffer_capacity:
            raise ConfigError("batch_size must be ≥ 1 and ≤ buffer_capacity")
        if not 0 <= self.tau <= 1:
            raise ConfigError("tau must lie in [0, 1]")
        if self.explain_weight < 0:
            raise ConfigError("explain_weight must be ≥ 0")
        for name in ("episodes", "steps_per_episode", "eval_interval", "shapley_samples",
                     "rollout_count", "explain_states", "train_every"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be ≥ 1")
        if self.rollout_horizon < 0:
            raise ConfigError("rollout_horizon must be ≥ 0")
        if self.noise_sigma0 < 0 or self.noise_sigma_min < 0 or not 0 < self.noise_decay <= 1:
            raise ConfigError("noise schedule values out of range")
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))

    def noise_sigma(self, episode: int) -> float:
        """Exploration noise scale for a zero-based episode index."""
        return max(self.noise_sigma_min, self.noise_sigma0 * self.noise_decay ** episode)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["hidden"] = list(out["hidden"])
        return out


DEFAULT_CONFIG_PATH = Path(__file__).with_name("configs") / "default.yaml"
PROFILES = ("paper", "desk", "smoke")


def _build(cls, values: dict, section: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(values) - names)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(unknown)}")
    try:
        return cls(**values)
    except TypeError as exc:
        raise ConfigError(f"[{section}]: {exc}") from exc


def parse_config(doc: Any, profile: str = "desk") -> tuple[NetworkConfig, TrainConfig]:
    """Build configs from a parsed YAML document.

    The document holds a ``network`` mapping, an optional ``train`` mapping shared by
    every profile, and a ``profiles`` mapping whose entries override ``train``.
    """
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping")
    unknown = sorted(set(doc) - {"network", "train", "profiles"})
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
    network = _build(NetworkConfig, dict(doc.get("network") or {}), "network")
    train_values = dict(doc.get("train") or {})
    profiles = doc.get("profiles") or {}
    if profile not in profiles:
        raise ConfigError(f"profile {profile!r} not found (available: {', '.join(profiles) or 'none'})")
    train_values.update(profiles[profile] or {})
    train = _build(TrainConfig, train_values, f"profiles.{profile}")
    return network, train


def load_config(path=None, profile: str = "desk") -> tuple[NetworkConfig, TrainConfig]:
    path = Path(path) if path is not None else DEFAULT_CONFIG_PATH
    try:
        doc = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}") from exc
    return parse_config(doc, profile)


def config_document(network: NetworkConfig, train: TrainConfig, profile: str) -> dict:
    """Inverse of :func:`parse_config` for a single profile (used in run manifests)."""
    return {"network": network.to_dict(), "profiles": {profile: train.to_dict()}}
