"""Attention-augmented DDPG agent."""
from .actor import AttentionActor
from .ddpg import DDPGAgent
from .replay import ReplayBuffer
from .training import METRIC_FIELDS, EpisodeRecord, TrainingResult, run_training, shapley_targets

__all__ = ["AttentionActor", "DDPGAgent", "EpisodeRecord", "METRIC_FIELDS", "ReplayBuffer",
           "TrainingResult", "run_training", "shapley_targets"]
