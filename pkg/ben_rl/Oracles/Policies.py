"""Reference tiger policies acting on the belief P(tiger left | h).

All policies accept a scalar belief or an array of beliefs and return
action indices of the same shape.
"""
import numpy as np

from ..Environments.TigerEnvironment import LISTEN, OPEN_LEFT, OPEN_RIGHT
from .BeliefValueIteration import BeliefGrid


def bayes_optimal_action(grid: BeliefGrid, belief):
    """Greedy action of the converged belief values; ties go to listening."""
    values = grid.action_values(belief)
    best = np.max(values, axis=1, keepdims=True)
    actions = np.where(values[:, LISTEN] >= best[:, 0], LISTEN, np.argmax(values, axis=1))
    return int(actions[0]) if np.ndim(belief) == 0 else actions


def qbrl_policy_action(belief, rng: np.random.Generator):
    """Posterior mixture of the contextual optima: open right with probability P(tiger left)."""
    b = np.asarray(belief, dtype=np.float64)
    actions = np.where(rng.random(b.shape) < b, OPEN_RIGHT, OPEN_LEFT)
    return int(actions) if actions.ndim == 0 else actions


def listen_action(belief, rng: np.random.Generator = None):
    b = np.asarray(belief)
    return LISTEN if b.ndim == 0 else np.full(b.shape, LISTEN)


class BayesOptimalPolicy:
    def __init__(self, grid: BeliefGrid):
        self.grid = grid

    def __call__(self, belief, rng):
        return bayes_optimal_action(self.grid, belief)


def qbrl_policy(belief, rng):
    return qbrl_policy_action(belief, rng)


def listen_policy(belief, rng):
    return listen_action(belief, rng)
