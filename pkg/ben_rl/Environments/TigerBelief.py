from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .TigerEnvironment import LISTEN, OPEN_LEFT, S1, S2, TIGER_LEFT, TIGER_RIGHT, TigerConfig


@dataclass(frozen=True)
class TigerBelief:
    """Exact posterior over the tiger's side.

    While no door has been opened it depends only on the listen counts:
    P(left) = p^N1 q^N2 / (p^N1 q^N2 + q^N1 p^N2). Opening a door reveals the
    side through the reward and the belief collapses for good.
    """

    n1: int = 0
    n2: int = 0
    revealed: Optional[int] = None
    config: TigerConfig = TigerConfig()

    @property
    def probability_left(self) -> float:
        if self.revealed is not None:
            return 1.0 if self.revealed == TIGER_LEFT else 0.0
        log_ratio = np.log(self.config.p_correct / self.config.p_wrong)
        return float(special.expit((self.n1 - self.n2) * log_ratio))

    def update(self, action: int, reward: float, next_state: int) -> "TigerBelief":
        if action == LISTEN:
            if next_state == S1:
                return replace(self, n1=self.n1 + 1)
            if next_state == S2:
                return replace(self, n2=self.n2 + 1)
            return self
        tiger_behind_opened = reward == self.config.r_tiger
        opened_left = action == OPEN_LEFT
        side = TIGER_LEFT if tiger_behind_opened == opened_left else TIGER_RIGHT
        return replace(self, revealed=side)

    @classmethod
    def from_history(
        cls,
        actions: Sequence[int],
        rewards: Sequence[float],
        next_states: Sequence[int],
        config: TigerConfig = TigerConfig(),
    ) -> "TigerBelief":
        belief = cls(config=config)
        for action, reward, next_state in zip(actions, rewards, next_states):
            belief = belief.update(action, reward, next_state)
        return belief


def tiger_belief_update(belief: TigerBelief, action: int, reward: float, next_state: int) -> TigerBelief:
    return belief.update(action, reward, next_state)
