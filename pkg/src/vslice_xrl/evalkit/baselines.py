"""Non-learned reference policies."""
import numpy as np

from ..env.projection import RelaxedAction


def random_policy(rng, num_vehicles: int, num_gnbs: int) -> RelaxedAction:
    """Association scores and PRB fractions drawn i.i.d. uniform on [0, 1]."""
    return RelaxedAction(rng.random((num_vehicles, num_gnbs)), rng.random((num_vehicles, num_gnbs)))


class RandomPolicy:
    """Observation-ignoring policy returning flat uniform actions."""

    def __init__(self, rng, num_vehicles: int, num_gnbs: int):
        self.rng = rng
        self.shape = (num_vehicles, num_gnbs)

    def __call__(self, obs):
        return random_policy(self.rng, *self.shape).to_vector()
