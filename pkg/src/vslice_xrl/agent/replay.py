"""Fixed-capacity FIFO replay buffer."""
import numpy as np


class ReplayBuffer:
    def __init__(self, capacity: int, obs_dim: int, action_dim: int):
        if capacity < 1:
            raise ValueError("capacity must be ≥ 1")
        self.capacity = int(capacity)
        self.states = np.zeros((self.capacity, obs_dim))
        self.actions = np.zeros((self.capacity, action_dim))
        self.rewards = np.zeros(self.capacity)
        self.next_states = np.zeros((self.capacity, obs_dim))
        self.size = 0
        self._head = 0
        self._state_sum = np.zeros(obs_dim)

    def __len__(self):
        return self.size

    def add(self, s, a, r, s_next):
        k = self._head
        if self.size == self.capacity:
            self._state_sum -= self.states[k]
        self.states[k] = s
        self.actions[k] = a
        self.rewards[k] = r
        self.next_states[k] = s_next
        self._state_sum += self.states[k]
        self._head = (k + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample_indices(self, batch_size: int, rng) -> np.ndarray:
        if self.size < batch_size:
            raise ValueError(f"buffer holds {self.size} transitions, need {batch_size}")
        return rng.integers(0, self.size, size=batch_size)

    def sample(self, batch_size: int, rng):
        idx = self.sample_indices(batch_size, rng)
        return self.states[idx], self.actions[idx], self.rewards[idx], self.next_states[idx]

    def mean_state(self) -> np.ndarray:
        """Mean of the stored states (zeros while empty)."""
        if self.size == 0:
            return np.zeros_like(self._state_sum)
        return self._state_sum / self.size
