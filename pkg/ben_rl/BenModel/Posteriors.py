"""Interchangeable sources of phi draws.

The trainer only ever asks a posterior for ``sample(n, rng)``; whether the
draws come from the prior, a point mass, the variational flow or the exact
tiger posterior is decided when the agent is built.
"""
import abc
from dataclasses import dataclass

import numpy as np

from ..DiffMath import Ops, ParamStore, Tensor
from ..Environments.TigerBelief import TigerBelief
from ..Environments.TigerEnvironment import TIGER_LEFT, TIGER_RIGHT
from .EpistemicNetwork import EpistemicNetwork
from .PriorSpec import PriorSpec


@dataclass(frozen=True, eq=False)
class PosteriorSample:
    phi: Tensor
    # log|det d phi / d z| per row
    logdet: Tensor


class PosteriorProvider(abc.ABC):
    phi_dim: int

    @abc.abstractmethod
    def sample(self, n: int, rng: np.random.Generator, differentiable: bool = False) -> PosteriorSample:
        raise NotImplementedError


class PriorPosterior(PosteriorProvider):
    def __init__(self, prior: PriorSpec):
        self.prior = prior
        self.phi_dim = prior.dim

    def sample(self, n, rng, differentiable=False):
        logdet = np.full(n, float(np.sum(np.log(self.prior.std))))
        return PosteriorSample(Tensor(self.prior.sample(n, rng)), Tensor(logdet))


class PointPosterior(PosteriorProvider):
    def __init__(self, phi):
        self.phi = np.atleast_1d(np.asarray(phi, dtype=np.float64))
        self.phi_dim = self.phi.shape[0]

    def sample(self, n, rng, differentiable=False):
        return PosteriorSample(Tensor(np.tile(self.phi, (n, 1))), Tensor(np.zeros(n)))


class VariationalPosterior(PosteriorProvider):
    """q_psi(phi) given by an epistemic flow and its parameter store."""

    def __init__(self, network: EpistemicNetwork, params: ParamStore):
        self.network = network
        self.params = params
        self.phi_dim = network.phi_dim
        self._initial_state = params.state_dict()

    def sample(self, n, rng, differentiable=False):
        phi, logdet = self.network.sample(self.params, Tensor(rng.standard_normal((n, self.phi_dim))))
        if not differentiable:
            phi, logdet = Ops.stop_gradient(phi), Ops.stop_gradient(logdet)
        return PosteriorSample(phi, logdet)

    def reset(self):
        """Back to the freshly initialized psi, optimizer state included."""
        self.params.load_state_dict(self._initial_state, reset_optimizer=True)

    def at_initial_state(self) -> bool:
        current = self.params.state_dict()
        return all(np.array_equal(current[key], value) for key, value in self._initial_state.items())


class ExactTigerPosterior(PosteriorProvider):
    """Two-point posterior over the tiger side; phi is 0 (left) or 1 (right)."""

    phi_dim = 1

    def __init__(self, belief: TigerBelief = None):
        self.belief = belief or TigerBelief()

    def sample(self, n, rng, differentiable=False):
        left = rng.random(n) < self.belief.probability_left
        phi = np.where(left, TIGER_LEFT, TIGER_RIGHT).astype(np.float64)[:, None]
        return PosteriorSample(Tensor(phi), Tensor(np.zeros(n)))
