import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..Environments.TigerEnvironment import LISTEN, OPEN_LEFT, OPEN_RIGHT, TIGER_LEFT, TigerConfig

logger = logging.getLogger(__name__)

# discounted rollouts stop once gamma ** horizon drops below this
DISCOUNT_CUTOFF = 1e-9


@dataclass(frozen=True, eq=False)
class RolloutEstimate:
    returns: np.ndarray

    @property
    def mean(self) -> float:
        return float(np.mean(self.returns))

    @property
    def stderr(self) -> float:
        if len(self.returns) < 2:
            return 0.0
        return float(np.std(self.returns, ddof=1) / np.sqrt(len(self.returns)))

    @property
    def median(self) -> float:
        return float(np.median(self.returns))


def discount_horizon(gamma: float, cutoff: float = DISCOUNT_CUTOFF) -> int:
    return int(np.ceil(np.log(cutoff) / np.log(gamma)))


def tiger_rollouts(
    policy: Callable[[np.ndarray, np.random.Generator], np.ndarray],
    n_episodes: int,
    rng: np.random.Generator,
    config: TigerConfig = TigerConfig(),
    horizon: Optional[int] = None,
    discounted: bool = True,
) -> RolloutEstimate:
    """Run ``n_episodes`` tiger episodes side by side under a belief policy.

    Each episode draws its tiger side uniformly. Opening a door reveals the
    side, so the belief collapses to 0 or 1 from then on.
    """
    horizon = discount_horizon(config.gamma) if horizon is None else int(horizon)
    phi = rng.integers(2, size=n_episodes)
    tiger_left = phi == TIGER_LEFT
    belief = np.full(n_episodes, 0.5)
    returns = np.zeros(n_episodes)

    for t in range(horizon):
        actions = np.asarray(policy(belief, rng))
        weight = config.gamma ** t if discounted else 1.0

        opened = actions != LISTEN
        hit_tiger = ((actions == OPEN_LEFT) & tiger_left) | ((actions == OPEN_RIGHT) & ~tiger_left)
        rewards = np.where(opened, np.where(hit_tiger, config.r_tiger, config.r_gold), config.r_listen)
        returns += weight * rewards

        u = rng.random(n_episodes)
        near = u < config.p_correct
        far = (u >= config.p_correct) & (u < config.p_correct + config.p_wrong)
        # s1 is heard near the left door
        heard_left = (near & tiger_left) | (far & ~tiger_left)
        heard_right = (near & ~tiger_left) | (far & tiger_left)
        likelihood_left = np.where(heard_left, config.p_correct, np.where(heard_right, config.p_wrong, 1.0))
        likelihood_right = np.where(heard_left, config.p_wrong, np.where(heard_right, config.p_correct, 1.0))
        listened = likelihood_left * belief / (likelihood_left * belief + likelihood_right * (1.0 - belief))
        belief = np.where(opened, tiger_left.astype(np.float64), listened)

    estimate = RolloutEstimate(returns)
    logger.debug("%d rollouts over %d steps: mean %.4f +- %.4f", n_episodes, horizon, estimate.mean, estimate.stderr)
    return estimate
