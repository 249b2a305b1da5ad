from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from gym import spaces

from ..Errors import ConfigError, InvalidContextError
from .CmdpEnvironment import CmdpEnvironment

UP, DOWN, LEFT, RIGHT, LISTEN = 0, 1, 2, 3, 4
N_ACTIONS = 5
MOVES = {UP: (0, 1), DOWN: (0, -1), LEFT: (-1, 0), RIGHT: (1, 0)}


@dataclass(frozen=True)
class SearchRescueConfig:
    grid_size: int = 7
    n_victims: int = 4
    n_hazards: int = 8
    r_victim: float = 10.0
    r_hazard: float = -100.0
    r_listen: float = -1.0
    gamma: float = 0.99
    sigma_noise: float = 0.1
    # None means 5 * grid_size ** 2
    max_steps: Optional[int] = None

    def __post_init__(self):
        if self.grid_size < 3 or self.grid_size % 2 == 0:
            raise ConfigError(f"grid_size must be odd and at least 3, got {self.grid_size}")
        if self.n_victims < 0 or self.n_hazards < 0:
            raise ConfigError("entity counts must be non-negative")
        if self.n_victims + self.n_hazards > 4 * self.grid_size:
            raise ConfigError(f"at most {4 * self.grid_size} victims and hazards fit on the doors")
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.sigma_noise < 0.0:
            raise ConfigError("sigma_noise must be non-negative")
        if self.max_steps is None:
            object.__setattr__(self, "max_steps", 5 * self.grid_size ** 2)

    @property
    def half_width(self) -> int:
        return (self.grid_size - 1) // 2

    @property
    def state_dim(self) -> int:
        return 2 + self.n_victims + self.n_hazards

    @property
    def rescued_location(self) -> np.ndarray:
        return np.array([self.grid_size * 1000.0, self.grid_size * 1000.0])

    @property
    def prior_door_reward(self) -> float:
        """Expected reward for opening a random door under the placement prior."""
        total = self.n_victims * self.r_victim + self.n_hazards * self.r_hazard
        return total / (4 * self.grid_size)

    def door_cells(self) -> np.ndarray:
        """The 4 * grid_size cells just outside the grid, one per boundary exit."""
        k = self.half_width
        span = np.arange(-k, k + 1)
        top = np.stack([span, np.full_like(span, k + 1)], axis=1)
        bottom = np.stack([span, np.full_like(span, -k - 1)], axis=1)
        right = np.stack([np.full_like(span, k + 1), span], axis=1)
        left = np.stack([np.full_like(span, -k - 1), span], axis=1)
        return np.concatenate([top, bottom, right, left], axis=0)

    def in_grid(self, cell) -> bool:
        k = self.half_width
        return abs(int(cell[0])) <= k and abs(int(cell[1])) <= k


@dataclass(frozen=True, eq=False)
class SearchRescueContext:
    """Hidden placement: integer door cells plus the sub-cell jitter heard when listening."""

    victim_doors: np.ndarray
    hazard_doors: np.ndarray
    victim_jitter: np.ndarray
    hazard_jitter: np.ndarray

    @classmethod
    def sample(cls, config: SearchRescueConfig, rng: np.random.Generator) -> "SearchRescueContext":
        doors = config.door_cells()
        chosen = rng.choice(len(doors), size=config.n_victims + config.n_hazards, replace=False)
        jitter = rng.uniform(-0.5, 0.5, size=(len(chosen), 2))
        v = config.n_victims
        return cls(doors[chosen[:v]], doors[chosen[v:]], jitter[:v], jitter[v:])

    def validate(self, config: SearchRescueConfig) -> "SearchRescueContext":
        victims = np.asarray(self.victim_doors, dtype=int).reshape(-1, 2)
        hazards = np.asarray(self.hazard_doors, dtype=int).reshape(-1, 2)
        if len(victims) != config.n_victims or len(hazards) != config.n_hazards:
            raise InvalidContextError("context does not match the configured entity counts")
        valid = {tuple(cell) for cell in config.door_cells()}
        placed = [tuple(cell) for cell in np.concatenate([victims, hazards])]
        if any(cell not in valid for cell in placed):
            raise InvalidContextError("every victim and hazard must sit on a door cell")
        if len(set(placed)) != len(placed):
            raise InvalidContextError("two entities share a door")
        return SearchRescueContext(
            victims,
            hazards,
            np.asarray(self.victim_jitter, dtype=np.float64).reshape(-1, 2),
            np.asarray(self.hazard_jitter, dtype=np.float64).reshape(-1, 2),
        )


@dataclass(frozen=True)
class SearchRescueState:
    location: Tuple[int, int] = (0, 0)
    rescued: Tuple[bool, ...] = field(default_factory=tuple)


@dataclass(frozen=True, eq=False)
class SearchRescueOutcome:
    reward: float
    state: SearchRescueState
    observation: np.ndarray
    rescued_victim: bool = False
    hit_hazard: bool = False


class SearchRescueDynamics:
    """Pure transition function shared by the environment and the prior simulator."""

    def __init__(self, config: SearchRescueConfig):
        self.config = config

    def initial_state(self) -> SearchRescueState:
        return SearchRescueState((0, 0), (False,) * self.config.n_victims)

    def observe(self, state: SearchRescueState, channels: Optional[np.ndarray] = None) -> np.ndarray:
        cfg = self.config
        if channels is None:
            channels = np.zeros(cfg.n_victims + cfg.n_hazards)
        return np.concatenate([np.asarray(state.location, dtype=np.float64), channels])

    def listen(self, state: SearchRescueState, context: SearchRescueContext, rng: np.random.Generator) -> np.ndarray:
        cfg = self.config
        victims = context.victim_doors + context.victim_jitter
        victims = np.where(np.asarray(state.rescued, dtype=bool)[:, None], cfg.rescued_location, victims)
        sources = np.concatenate([victims.reshape(-1, 2), (context.hazard_doors + context.hazard_jitter).reshape(-1, 2)])
        squared = np.sum((sources - np.asarray(state.location, dtype=np.float64)) ** 2, axis=1)
        noise = rng.normal(0.0, cfg.sigma_noise, size=len(sources)) if cfg.sigma_noise > 0.0 else 0.0
        return np.exp(-squared / cfg.grid_size + noise)

    def step(
        self, state: SearchRescueState, action: int, context: SearchRescueContext, rng: np.random.Generator
    ) -> SearchRescueOutcome:
        cfg = self.config
        if action == LISTEN:
            return SearchRescueOutcome(cfg.r_listen, state, self.observe(state, self.listen(state, context, rng)))

        dx, dy = MOVES[action]
        target = (state.location[0] + dx, state.location[1] + dy)
        if cfg.in_grid(target):
            moved = SearchRescueState(target, state.rescued)
            return SearchRescueOutcome(0.0, moved, self.observe(moved))

        for index, door in enumerate(context.victim_doors):
            if tuple(door) == target and not state.rescued[index]:
                rescued = tuple(True if i == index else r for i, r in enumerate(state.rescued))
                after = SearchRescueState(state.location, rescued)
                return SearchRescueOutcome(cfg.r_victim, after, self.observe(after), rescued_victim=True)
        for door in context.hazard_doors:
            if tuple(door) == target:
                return SearchRescueOutcome(cfg.r_hazard, state, self.observe(state), hit_hazard=True)
        return SearchRescueOutcome(0.0, state, self.observe(state))


class SearchRescueEnvironment(CmdpEnvironment):
    """Grid search-and-rescue with victims and hazards behind boundary doors.

    The agent starts at the centre (0, 0). Stepping off the grid opens the
    door there: victims pay ``r_victim`` once, hazards pay ``r_hazard`` every
    time. Listening returns a noisy closeness signal per victim and hazard;
    the signal channels are zero on every other step.
    """

    env_id = "SearchRescue-v0"
    config_type = SearchRescueConfig

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self.dynamics = SearchRescueDynamics(self.config)
        self.observation_space = spaces.Box(low=-np.inf, high=np.inf, shape=(self.config.state_dim,), dtype=np.float64)
        self.action_space = spaces.Discrete(N_ACTIONS)
        self.state = self.dynamics.initial_state()
        self._last_observation = self.dynamics.observe(self.state)
        self.victims_saved = 0
        self.hazards_hit = 0

    def sample_context(self, rng):
        return SearchRescueContext.sample(self.config, rng)

    def validate_context(self, phi):
        if not isinstance(phi, SearchRescueContext):
            raise InvalidContextError(f"Expected a SearchRescueContext, got {type(phi).__name__}")
        return phi.validate(self.config)

    def _reset_state(self):
        self.state = self.dynamics.initial_state()
        self._last_observation = self.dynamics.observe(self.state)
        self.victims_saved = 0
        self.hazards_hit = 0

    def _transition(self, action):
        outcome = self.dynamics.step(self.state, action, self.phi, self.np_random)
        self.state = outcome.state
        self._last_observation = outcome.observation
        self.victims_saved += int(outcome.rescued_victim)
        self.hazards_hit += int(outcome.hit_hazard)
        info = {"victims_saved": self.victims_saved, "hazards_hit": self.hazards_hit}
        return outcome.reward, False, info

    def observation(self):
        return self._last_observation.copy()
