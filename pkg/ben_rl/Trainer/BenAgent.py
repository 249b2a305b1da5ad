import logging
from typing import Optional

import numpy as np

from ..BenModel import (
    AleatoricConfig,
    AleatoricNetwork,
    EpistemicNetwork,
    ExactTigerPosterior,
    FlowTargets,
    PosteriorProvider,
    PriorPosterior,
    PriorSpec,
    TigerTargets,
    VariationalPosterior,
    unroll,
)
from ..BenModel.History import TrajectoryWindow
from ..DiffMath import Adam, ParamStore
from ..Environments import CmdpEnvironment, TigerBelief, TigerEnvironment
from ..Errors import ConfigError
from ..NetBlocks import QNetConfig, RecurrentQNetwork
from .TrainConfig import TrainConfig

logger = logging.getLogger(__name__)


class BenAgent:
    """Q-network, Bellman-target model and posterior of one training run.

    ``omega`` holds the Q-network. With a variational posterior, ``psi``
    holds the epistemic flow and ``model_params`` the aleatoric network's
    conditioner and flow weights, both moved by the ELBO optimizer.
    """

    def __init__(
        self,
        qnet: RecurrentQNetwork,
        omega: ParamStore,
        targets,
        posterior: PosteriorProvider,
        prior_posterior: PosteriorProvider,
        gamma: float,
        config: TrainConfig,
        network: Optional[EpistemicNetwork] = None,
        psi: Optional[ParamStore] = None,
        model_params: Optional[ParamStore] = None,
        prior: Optional[PriorSpec] = None,
    ):
        self.qnet = qnet
        self.omega = omega
        self.targets = targets
        self.posterior = posterior
        self.prior_posterior = prior_posterior
        self.gamma = gamma
        self.network = network
        self.psi = psi
        self.model_params = model_params
        self.prior = prior
        self.omega_optimizer = Adam(config.lr_omega, clip_norm=config.clip_norm)
        self.psi_optimizer = Adam(config.lr_psi, clip_norm=config.clip_norm)

    @property
    def builder(self):
        return self.qnet.observations

    @property
    def variational(self) -> bool:
        return isinstance(self.posterior, VariationalPosterior)

    @property
    def model(self):
        return self.targets.model

    @property
    def stores(self):
        return [store for store in (self.omega, self.psi, self.model_params) if store is not None]

    def zero_grads(self):
        for store in self.stores:
            store.zero_grad()

    def q_values(self, window: TrajectoryWindow) -> np.ndarray:
        return unroll(self.qnet, self.omega, window)[-1].q_values.numpy()

    @staticmethod
    def greedy_action(q_values: np.ndarray) -> int:
        """argmax with ties going to the lowest action index."""
        return int(np.argmax(q_values))

    def observe(self, action: int, reward: float, next_state: np.ndarray):
        if isinstance(self.posterior, ExactTigerPosterior):
            self.posterior.belief = self.posterior.belief.update(action, reward, int(np.argmax(next_state)))

    def reset_posterior(self):
        """Back to the prior: psi and its optimizer state, or the exact belief."""
        if isinstance(self.posterior, VariationalPosterior):
            self.posterior.reset()
        elif isinstance(self.posterior, ExactTigerPosterior):
            self.posterior.belief = TigerBelief(config=self.posterior.belief.config)


def build_agent(
    env: CmdpEnvironment,
    config: TrainConfig,
    rng: np.random.Generator,
    qnet_args: Optional[dict] = None,
    aleatoric_config: AleatoricConfig = AleatoricConfig(),
) -> BenAgent:
    qnet_config = QNetConfig(
        state_dim=int(env.observation_space.shape[0]), n_actions=int(env.action_space.n), **(qnet_args or {})
    )
    qnet = RecurrentQNetwork(qnet_config)
    omega = ParamStore("omega")
    qnet.initialize(omega, rng)

    if config.posterior == "exact_tiger":
        if not isinstance(env, TigerEnvironment):
            raise ConfigError("the exact posterior is only available for the tiger environment")
        posterior = ExactTigerPosterior(TigerBelief(config=env.config))
        prior_posterior = ExactTigerPosterior(TigerBelief(config=env.config))
        targets = TigerTargets(qnet, omega, env.dynamics, posterior, env.gamma)
        logger.info("agent with exact tiger posterior, %d Q-network parameters", omega.num_parameters)
        return BenAgent(qnet, omega, targets, posterior, prior_posterior, env.gamma, config)

    model = AleatoricNetwork(aleatoric_config, qnet.encoding_dim)
    model_params = ParamStore("aleatoric")
    model.initialize(model_params, rng)
    prior = PriorSpec.isotropic(model.phi_dim, config.prior_variance)
    network = EpistemicNetwork(model.phi_dim, config.epistemic_layout)
    psi = ParamStore("psi")
    network.initialize(psi, rng, prior)
    posterior = VariationalPosterior(network, psi)
    targets = FlowTargets(model, posterior, model_params)
    logger.info(
        "agent with variational posterior: %d Q-network, %d aleatoric and %d epistemic parameters (phi dim %d)",
        omega.num_parameters,
        model_params.num_parameters,
        psi.num_parameters,
        model.phi_dim,
    )
    return BenAgent(
        qnet,
        omega,
        targets,
        posterior,
        PriorPosterior(prior),
        env.gamma,
        config,
        network=network,
        psi=psi,
        model_params=model_params,
        prior=prior,
    )
