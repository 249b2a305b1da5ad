import dataclasses
import logging
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from gym import Env

from ..Errors import ConfigError, InvalidActionError, ResetNeededError

logger = logging.getLogger(__name__)

_reset_option_names = ["phi"]


class CmdpEnvironment(Env):
    """A contextual MDP: every episode hides a context ``phi`` drawn from a prior.

    Subclasses declare a frozen ``config_type`` dataclass whose fields are the
    accepted config keys and implement the context prior and the transition.
    ``reset(options={"phi": ...})`` pins the context instead of sampling it.
    """

    env_id: str = ""
    config_type: Any = None

    def __init__(self, **kwargs):
        self._config = kwargs
        self.config = self._parse_env_kwargs(kwargs)
        self.gamma = self.config.gamma
        self.phi = None
        self.steps = 0
        self._needs_reset = True
        logger.info("%s configured with %s", self.env_id or type(self).__name__, dataclasses.asdict(self.config))

    @classmethod
    def _parse_env_kwargs(cls, config: Dict[str, Any]):
        """Parses the config and returns the environment's config dataclass.

        Args:
            config (dict): The config to parse.

        Returns:
            The ``config_type`` instance.
        """
        names = {field.name for field in dataclasses.fields(cls.config_type)}
        kwargs = {}
        for key, value in config.items():
            if key in names:
                kwargs[key] = value
            else:
                raise ConfigError(f"Unknown config key for environment `{cls.env_id}`: {key}")
        return cls.config_type(**kwargs)

    @property
    def max_steps(self) -> Optional[int]:
        return self.config.max_steps

    def sample_context(self, rng: np.random.Generator):
        raise NotImplementedError

    def validate_context(self, phi):
        """Return ``phi`` in canonical form or raise ``InvalidContextError``."""
        raise NotImplementedError

    def _reset_state(self):
        raise NotImplementedError

    def _transition(self, action: int) -> Tuple[float, bool, dict]:
        """Advance the hidden state; returns (reward, terminated, info)."""
        raise NotImplementedError

    def observation(self) -> np.ndarray:
        raise NotImplementedError

    def reset(
        self,
        *,
        seed: Optional[int] = None,
        return_info: bool = False,
        options: Optional[dict] = None,
    ) -> Union[np.ndarray, Tuple[np.ndarray, dict]]:
        """Starts a new episode and returns the initial observation.

        Args:
            seed (optional int): Reseeds the environment's PRNG when given.
            return_info (bool): Also return an info dict.
            options (optional dict): ``{"phi": context}`` fixes the hidden
                context; otherwise it is sampled from the prior.
        """
        super().reset(seed=seed)
        options = options or {}
        for key in options:
            if key not in _reset_option_names:
                raise ConfigError(f"Unknown reset option for environment `{self.env_id}`: {key}")

        phi = options.get("phi")
        self.phi = self.sample_context(self.np_random) if phi is None else self.validate_context(phi)
        self.steps = 0
        self._needs_reset = False
        self._reset_state()

        obs = self.observation()
        return (obs, {}) if return_info else obs

    def step(self, action) -> Tuple[np.ndarray, float, bool, bool, dict]:
        """Run one timestep and return ``(observation, reward, terminated, truncated, info)``."""
        if self._needs_reset:
            raise ResetNeededError(f"Call reset() before step() on `{self.env_id}`")
        try:
            action = int(action)
        except (TypeError, ValueError):
            raise InvalidActionError(f"Action {action!r} is not an integer index") from None
        if not self.action_space.contains(action):
            raise InvalidActionError(f"Action {action} outside {self.action_space}")

        reward, terminated, info = self._transition(action)
        self.steps += 1
        truncated = self.max_steps is not None and self.steps >= self.max_steps
        if terminated or truncated:
            self._needs_reset = True
        return self.observation(), float(reward), terminated, truncated, info
