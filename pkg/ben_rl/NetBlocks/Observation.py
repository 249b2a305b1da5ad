from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..Errors import ShapeError


@dataclass(frozen=True)
class Observation:
    """What the Q-network sees at one timestep: (r_{t-1}, s_t, a_{t-1})."""

    prev_reward: float
    state: np.ndarray
    prev_action: np.ndarray

    def __post_init__(self):
        total = float(np.sum(self.prev_action))
        if total not in (0.0, 1.0) or np.any((self.prev_action != 0.0) & (self.prev_action != 1.0)):
            raise ShapeError("prev_action must be one-hot or all zeros")


class ObservationBuilder:
    """Builds Q-network inputs from environment transitions.

    The flat input layout is ``[scaled prev_reward, state..., one-hot prev_action...]``.
    At the start of an episode the reward and action slots are zero-filled.
    """

    def __init__(self, state_dim: int, n_actions: int, reward_scale: float = 1.0):
        self.state_dim = state_dim
        self.n_actions = n_actions
        self.reward_scale = reward_scale

    @property
    def input_dim(self) -> int:
        return 1 + self.state_dim + self.n_actions

    def one_hot(self, action: Optional[int]) -> np.ndarray:
        encoded = np.zeros(self.n_actions)
        if action is not None:
            encoded[int(action)] = 1.0
        return encoded

    def initial(self, state: np.ndarray) -> Observation:
        return self.build(0.0, state, None)

    def build(self, prev_reward: float, state: np.ndarray, prev_action: Optional[int]) -> Observation:
        state = np.asarray(state, dtype=np.float64)
        if state.shape != (self.state_dim,):
            raise ShapeError(f"Expected a state of shape ({self.state_dim},), got {state.shape}")
        return Observation(float(prev_reward), state, self.one_hot(prev_action))

    def encode(self, observation: Observation) -> np.ndarray:
        return np.concatenate(
            [[observation.prev_reward * self.reward_scale], observation.state, observation.prev_action]
        )

    def encode_batch(self, rewards: Sequence[float], states: Sequence[np.ndarray], actions: Sequence[int]) -> np.ndarray:
        """Rows for several candidate transitions out of the same history."""
        states = np.asarray(states, dtype=np.float64).reshape(len(rewards), self.state_dim)
        one_hot = np.zeros((len(rewards), self.n_actions))
        one_hot[np.arange(len(rewards)), np.asarray(actions, dtype=int)] = 1.0
        return np.concatenate([np.asarray(rewards, dtype=np.float64)[:, None] * self.reward_scale, states, one_hot], axis=1)
