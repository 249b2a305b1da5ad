"""Bayes-adaptive value iteration for the tiger problem on a belief grid.

The belief b is P(tiger left | h). Opening a door reveals the side, after
which the known-context optimum q_correct takes over, so the open actions
are affine in b. Listening moves the belief by Bayes' rule through the
three listen outcomes; off-grid beliefs are read by linear interpolation.
"""
import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from ..Environments.TigerEnvironment import LISTEN, OPEN_LEFT, OPEN_RIGHT, TigerConfig
from ..Errors import ConfigError, ConvergenceError
from .TigerAnalytic import TigerAnalytic

logger = logging.getLogger(__name__)


@dataclass
class BeliefGrid:
    resolution: int = 2001
    config: TigerConfig = TigerConfig()
    values: np.ndarray = None
    residuals: List[float] = field(default_factory=list)

    def __post_init__(self):
        if self.resolution < 3:
            raise ConfigError(f"belief grid needs at least 3 points, got {self.resolution}")
        if self.values is None:
            self.values = np.zeros(self.resolution)

    @property
    def beliefs(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.resolution)

    @property
    def gamma(self) -> float:
        return self.config.gamma

    def value(self, belief) -> np.ndarray:
        return np.interp(belief, self.beliefs, self.values)

    def action_values(self, belief) -> np.ndarray:
        """(n, 3) action values at ``belief``, columns ordered like the tiger actions."""
        cfg = self.config
        b = np.atleast_1d(np.asarray(belief, dtype=np.float64))
        q_correct, _ = TigerAnalytic.from_config(cfg).contextual_q_values()
        tiger = cfg.r_tiger + cfg.gamma * q_correct
        gold = cfg.r_gold + cfg.gamma * q_correct

        p_near = cfg.p_correct * b + cfg.p_wrong * (1.0 - b)
        p_far = cfg.p_wrong * b + cfg.p_correct * (1.0 - b)
        after_near = cfg.p_correct * b / p_near
        after_far = cfg.p_wrong * b / p_far
        continuation = p_near * self.value(after_near) + p_far * self.value(after_far) + cfg.p_stay * self.value(b)

        values = np.empty((b.shape[0], 3))
        values[:, OPEN_LEFT] = b * tiger + (1.0 - b) * gold
        values[:, OPEN_RIGHT] = b * gold + (1.0 - b) * tiger
        values[:, LISTEN] = cfg.r_listen + cfg.gamma * continuation
        return values

    def sweep(self) -> float:
        """One synchronous Bellman backup; returns the sup-norm change."""
        updated = np.max(self.action_values(self.beliefs), axis=1)
        residual = float(np.max(np.abs(updated - self.values)))
        self.values = updated
        self.residuals.append(residual)
        return residual


def belief_value_iteration(
    grid: BeliefGrid, tol: float = 1e-8, max_iterations: int = 5000
) -> BeliefGrid:
    for iteration in range(1, max_iterations + 1):
        residual = grid.sweep()
        if residual < tol:
            logger.info(
                "belief value iteration converged after %d sweeps (residual %.3g, V(0.5)=%.6f)",
                iteration,
                residual,
                float(grid.value(0.5)),
            )
            return grid
    raise ConvergenceError(
        f"belief value iteration did not reach {tol} within {max_iterations} sweeps (last residual {grid.residuals[-1]:.3g})"
    )


def solve_tiger(config: TigerConfig = TigerConfig(), resolution: int = 2001, tol: float = 1e-8) -> BeliefGrid:
    return belief_value_iteration(BeliefGrid(resolution, config), tol)
