"""Samplers of Bellman targets b at one point of a history.

``FlowTargets`` draws b = B(z_al, h, q, phi) from a learned Bellman model.
``TigerTargets`` is the hand-coded pushforward of the known tiger transition
law: it draws (r, s') and bootstraps through the Q-network,
b = r + gamma * max_a Q(h + (a, r, s'), a).
"""
import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..DiffMath import Ops, ParamStore, Tensor
from ..Environments.TigerEnvironment import S0, TigerDynamics, one_hot_state
from ..NetBlocks import GruState, RecurrentQNetwork
from .BellmanModels import BellmanModel
from .Posteriors import PosteriorProvider


@dataclass(frozen=True, eq=False)
class EvaluationPoint:
    """Q-network output after consuming a history: the encoding and the q-vector."""

    encoding: GruState
    q_values: Tensor
    state: Optional[np.ndarray] = None

    def q(self, action: int, n: int = 1) -> Tensor:
        return Ops.broadcast_to(Ops.take(self.q_values, int(action)), (n,))


@dataclass(frozen=True, eq=False)
class FlowTargets:
    model: BellmanModel
    posterior: PosteriorProvider
    model_params: ParamStore

    def using(self, posterior: PosteriorProvider) -> "FlowTargets":
        return dataclasses.replace(self, posterior=posterior)

    def sample(self, point: EvaluationPoint, action: int, n: int, rng: np.random.Generator) -> Tensor:
        phi = self.posterior.sample(n, rng).phi
        return self.model.sample(self.model_params, phi, point.encoding.hidden, point.q(action, n), rng)


@dataclass(frozen=True, eq=False)
class TigerTargets:
    qnet: RecurrentQNetwork
    params: ParamStore
    dynamics: TigerDynamics
    posterior: PosteriorProvider
    gamma: float

    def using(self, posterior: PosteriorProvider) -> "TigerTargets":
        return dataclasses.replace(self, posterior=posterior)

    def sample(self, point: EvaluationPoint, action: int, n: int, rng: np.random.Generator) -> Tensor:
        phis = self.posterior.sample(n, rng).phi.values[:, 0].astype(int)
        rewards, next_states = [], []
        for phi in phis:
            reward, next_state = self.dynamics.sample(S0, action, int(phi), rng)
            rewards.append(reward)
            next_states.append(one_hot_state(next_state))
        rows = self.qnet.observations.encode_batch(rewards, next_states, [action] * n)
        _, next_q = self.qnet.step(self.params, point.encoding, rows)
        return Ops.add(np.asarray(rewards, dtype=np.float64), Ops.mul(Ops.max(next_q, axis=-1), self.gamma))
