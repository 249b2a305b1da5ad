import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, List, Optional

import numpy as np

from ..BenModel import AleatoricConfig, TrajectoryBuffer
from ..Environments import CmdpEnvironment, SearchRescueDynamics, SearchRescueEnvironment, build_prior_dataset
from ..Errors import ConfigError, TrainingDivergedError
from .BenAgent import BenAgent, build_agent
from .Procedures import posterior_updating, prior_initialisation
from .TrainConfig import TrainConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricsRow:
    seed: int
    episode: int
    t: int
    action: int
    reward: float
    cum_return: float
    victims_saved: int
    hazards_hit: int
    msbbe: float
    elbo: float


METRICS_FIELDS = tuple(f.name for f in fields(MetricsRow))


@dataclass
class RunMetrics:
    rows: List[MetricsRow] = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def append(self, row: MetricsRow):
        self.rows.append(row)

    def extend(self, other: "RunMetrics"):
        self.rows.extend(other.rows)

    def as_dicts(self) -> List[dict]:
        return [asdict(row) for row in self.rows]

    def episode_returns(self) -> Dict[tuple, float]:
        """Final cumulative return of every (seed, episode)."""
        returns = {}
        for row in self.rows:
            returns[(row.seed, row.episode)] = row.cum_return
        return returns

    def episode_totals(self, column: str) -> Dict[tuple, int]:
        """Last value of a running counter column (victims_saved, hazards_hit) per (seed, episode)."""
        totals = {}
        for row in self.rows:
            totals[(row.seed, row.episode)] = getattr(row, column)
        return totals


def approx_brl(
    agent: BenAgent,
    env: CmdpEnvironment,
    config: TrainConfig,
    rng: np.random.Generator,
    seed: int = 0,
    phi=None,
) -> RunMetrics:
    """Pretrain from the prior, then act greedily and update after every step.

    Episodic modes reset the posterior at every episode and keep omega.
    ``phi`` pins the hidden context of every episode.
    """
    cap = config.max_steps or env.max_steps
    if cap is None:
        raise ConfigError(f"no episode length for `{env.env_id}`: set train.max_steps")
    options = None if phi is None else {"phi": phi}
    metrics = RunMetrics()

    state = env.reset(seed=seed, options=options)
    dataset, simulator = None, None
    knowledge = config.prior_knowledge()
    if isinstance(env, SearchRescueEnvironment):
        dataset = build_prior_dataset(env.config, knowledge, rng)
        simulator = SearchRescueDynamics(env.config)
    prior_initialisation(agent, config, state, rng, dataset, simulator)

    step = 0
    for episode in range(config.n_episodes):
        if episode > 0:
            state = env.reset(options=options)
        if episode == 0 or config.episodic:
            agent.reset_posterior()
        buffer = TrajectoryBuffer(agent.builder, state)
        cum_return = 0.0
        victims, hazards = 0, 0
        for t in range(cap):
            try:
                action = agent.greedy_action(agent.q_values(buffer.window(config.truncation)))
                state, reward, terminated, truncated, info = env.step(action)
                buffer.append(action, reward, state)
                agent.observe(action, reward, state)
                cum_return += reward
                victims = info.get("victims_saved", victims)
                hazards = info.get("hazards_hit", hazards)
                stats = posterior_updating(agent, config, buffer, rng, step)
            except TrainingDivergedError as exc:
                exc.diagnostics.update(seed=seed, episode=episode, t=t)
                exc.metrics = metrics
                raise
            metrics.append(
                MetricsRow(seed, episode, t, action, reward, cum_return, victims, hazards, stats.msbbe, stats.elbo)
            )
            step += 1
            if terminated or truncated:
                break
        logger.info(
            "seed %d episode %d: return %.2f over %d steps, %d victims saved, %d hazards hit",
            seed,
            episode,
            cum_return,
            len(buffer),
            victims,
            hazards,
        )
    return metrics


def run_seed(
    env: CmdpEnvironment,
    config: TrainConfig,
    seed: int,
    qnet_args: Optional[dict] = None,
    aleatoric_config: AleatoricConfig = AleatoricConfig(),
    phi=None,
) -> RunMetrics:
    """Build a fresh agent from ``seed`` and run ``approx_brl`` with it."""
    rng = np.random.default_rng(seed)
    agent = build_agent(env, config, rng, qnet_args, aleatoric_config)
    return approx_brl(agent, env, config, rng, seed, phi)
