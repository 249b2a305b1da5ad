from dataclasses import dataclass
from typing import NamedTuple

from ..Environments.TigerEnvironment import TigerConfig
from ..Errors import ConfigError


class ContextualValues(NamedTuple):
    q_correct: float
    q_wrong: float


@dataclass(frozen=True)
class TigerAnalytic:
    """Closed-form values of the tiger problem once the tiger's side is known."""

    r_tiger: float = -500.0
    r_gold: float = 10.0
    r_listen: float = -1.0
    gamma: float = 0.9

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigError(f"gamma must lie in [0, 1), got {self.gamma}")

    @classmethod
    def from_config(cls, config: TigerConfig) -> "TigerAnalytic":
        return cls(config.r_tiger, config.r_gold, config.r_listen, config.gamma)

    def contextual_q_values(self) -> ContextualValues:
        """Opening the gold door forever, and opening the tiger once before that."""
        q_correct = self.r_gold / (1.0 - self.gamma)
        return ContextualValues(q_correct, self.r_tiger + self.gamma * q_correct)

    def qbrl_value(self, prior: float = 0.5) -> float:
        """Return of the posterior mixture of contextual optima at P(tiger left) = ``prior``.

        The mixture opens the right door with probability ``prior``, so it
        picks the gold door with probability prior^2 + (1 - prior)^2.
        """
        if not 0.0 <= prior <= 1.0:
            raise ConfigError(f"prior must lie in [0, 1], got {prior}")
        q_correct, q_wrong = self.contextual_q_values()
        p_correct = prior * prior + (1.0 - prior) * (1.0 - prior)
        return p_correct * q_correct + (1.0 - p_correct) * q_wrong

    def listen_value(self) -> float:
        return self.r_listen / (1.0 - self.gamma)


def contextual_q_values(analytic: TigerAnalytic) -> ContextualValues:
    return analytic.contextual_q_values()


def qbrl_value(analytic: TigerAnalytic, prior: float = 0.5) -> float:
    return analytic.qbrl_value(prior)
