from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from gym import spaces

from ..Errors import ConfigError, InvalidContextError
from .CmdpEnvironment import CmdpEnvironment

TIGER_LEFT, TIGER_RIGHT = 0, 1
OPEN_LEFT, OPEN_RIGHT, LISTEN = 0, 1, 2
S0, S1, S2 = 0, 1, 2
N_STATES = 3
N_ACTIONS = 3


@dataclass(frozen=True)
class TigerConfig:
    r_tiger: float = -500.0
    r_gold: float = 10.0
    r_listen: float = -1.0
    gamma: float = 0.9
    # listening lands in the tiger's state with p_correct, the other one
    # with p_wrong and stays in s0 otherwise
    p_correct: float = 0.85
    p_wrong: float = 0.10
    max_steps: Optional[int] = None

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.p_correct <= 0.0 or self.p_wrong <= 0.0 or self.p_correct + self.p_wrong > 1.0:
            raise ConfigError("listen probabilities must be positive and sum to at most 1")

    @property
    def p_stay(self) -> float:
        return 1.0 - self.p_correct - self.p_wrong


def one_hot_state(state: int) -> np.ndarray:
    encoded = np.zeros(N_STATES)
    encoded[state] = 1.0
    return encoded


class TigerDynamics:
    """Transition law of the tiger problem as a pure function of (s, a, phi)."""

    def __init__(self, config: TigerConfig = None):
        self.config = config or TigerConfig()

    def door_reward(self, action: int, phi: int) -> float:
        tiger_door = OPEN_LEFT if phi == TIGER_LEFT else OPEN_RIGHT
        return self.config.r_tiger if action == tiger_door else self.config.r_gold

    def outcomes(self, state: int, action: int, phi: int) -> List[Tuple[float, float, int]]:
        """All (probability, reward, next_state) triples with non-zero probability."""
        cfg = self.config
        if action in (OPEN_LEFT, OPEN_RIGHT):
            return [(1.0, self.door_reward(action, phi), S0)]
        near, far = (S1, S2) if phi == TIGER_LEFT else (S2, S1)
        outcomes = [(cfg.p_correct, cfg.r_listen, near), (cfg.p_wrong, cfg.r_listen, far)]
        if cfg.p_stay > 0.0:
            outcomes.append((cfg.p_stay, cfg.r_listen, S0))
        return outcomes

    def sample(self, state: int, action: int, phi: int, rng: np.random.Generator) -> Tuple[float, int]:
        outcomes = self.outcomes(state, action, phi)
        u = rng.random()
        cumulative = 0.0
        for probability, reward, next_state in outcomes:
            cumulative += probability
            if u < cumulative:
                return reward, next_state
        return outcomes[-1][1], outcomes[-1][2]


class TigerEnvironment(CmdpEnvironment):
    """Two doors, one tiger. The tiger stays put for the whole episode.

    Observations are one-hot over {s0, s1, s2}; s1/s2 are only ever reached
    by listening and every action returns the agent to s0 afterwards.
    """

    env_id = "Tiger-v0"
    config_type = TigerConfig

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self.dynamics = TigerDynamics(self.config)
        self.observation_space = spaces.Box(low=0.0, high=1.0, shape=(N_STATES,), dtype=np.float64)
        self.action_space = spaces.Discrete(N_ACTIONS)
        self.state = S0

    def sample_context(self, rng):
        return int(rng.integers(2))

    def validate_context(self, phi):
        if phi not in (TIGER_LEFT, TIGER_RIGHT):
            raise InvalidContextError(f"Tiger context must be {TIGER_LEFT} or {TIGER_RIGHT}, got {phi!r}")
        return int(phi)

    def _reset_state(self):
        self.state = S0

    def _transition(self, action):
        reward, self.state = self.dynamics.sample(self.state, action, self.phi, self.np_random)
        return reward, False, {}

    def observation(self):
        return one_hot_state(self.state)
