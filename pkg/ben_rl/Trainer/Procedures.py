"""Pretraining from the prior and the two-timescale online update."""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from ..BenModel import TrajectoryBuffer, bootstrap, elbo_loss, elbo_step_loss, msbbe_loss, unroll
from ..BenModel.Losses import residual_product
from ..DiffMath import Adam, Ops, ParamStore, Tape, Tensor
from ..Environments import Demonstration, PriorDataset, PriorTransition, SearchRescueDynamics
from ..Errors import NonFiniteError, ShapeError, TrainingDivergedError
from .BenAgent import BenAgent
from .TrainConfig import TrainConfig

logger = logging.getLogger(__name__)


@dataclass
class UpdateStats:
    elbo_steps: int = 0
    msbbe_steps: int = 0
    msbbe: float = math.nan
    elbo: float = math.nan


@dataclass
class PretrainStats:
    steps: int = 0
    dataset_steps: int = 0
    msbbe: float = math.nan


def _optimise(
    agent: BenAgent,
    loss_name: str,
    build_loss: Callable[[], Tensor],
    updates: List[Tuple[ParamStore, Adam]],
    step: int,
) -> float:
    """Differentiate ``build_loss()`` and step every (store, optimizer) pair."""
    agent.zero_grads()
    try:
        with Tape() as tape:
            loss = build_loss()
        tape.backward(loss)
        for store, optimizer in updates:
            optimizer.step(store)
    except TrainingDivergedError:
        raise
    except NonFiniteError as exc:
        diagnostics = {
            "step": step,
            "loss": loss_name,
            "param_norms": {store.name: store.param_norms() for store in agent.stores},
        }
        raise TrainingDivergedError(f"`{loss_name}` diverged at step {step}: {exc}", diagnostics) from exc
    agent.zero_grads()
    return loss.item()


def _bootstrap_rows(agent: BenAgent, encoding, rewards, next_states, action: int) -> Tensor:
    rows = agent.builder.encode_batch(rewards, next_states, [action] * len(rewards))
    _, next_q = agent.qnet.step(agent.omega, encoding, rows)
    return Ops.add(np.asarray(rewards, dtype=np.float64), Ops.mul(Ops.max(next_q, axis=-1), agent.gamma))


def _demonstration_prefix(agent: BenAgent, demonstration: Demonstration, j: int):
    """Q-network observations o_0..o_j of a demonstration."""
    builder = agent.builder
    observations = [builder.initial(demonstration.observations[0])]
    for i in range(j):
        observations.append(
            builder.build(demonstration.rewards[i], demonstration.observations[i + 1], demonstration.actions[i])
        )
    return observations


def dataset_loss(
    agent: BenAgent,
    item: Union[PriorTransition, Demonstration],
    rng: np.random.Generator,
    simulator: Optional[SearchRescueDynamics] = None,
) -> Tensor:
    """Double-sampled Bellman error on one prior-knowledge item.

    Known transitions are deterministic, so both draws coincide and the
    product is the squared residual. Demonstrations draw two independent
    next transitions from the simulator at a random step of the episode.
    """
    if isinstance(item, PriorTransition):
        encoding, q_values = agent.qnet.step(agent.omega, agent.qnet.initial_state(), agent.builder.initial(item.state))
        b = _bootstrap_rows(agent, encoding, [item.reward], [item.next_state], item.action)
        return Ops.sum(Ops.square(Ops.sub(b, Ops.take(q_values, item.action))))

    if simulator is None:
        raise ShapeError("demonstrations need a simulator to draw next transitions from")
    j = int(rng.integers(len(item)))
    encoding, q_values = agent.qnet.unroll(agent.omega, _demonstration_prefix(agent, item, j))[-1]
    action = item.actions[j]
    outcomes = [simulator.step(item.snapshots[j], action, item.context, rng) for _ in range(2)]
    b = _bootstrap_rows(agent, encoding, [o.reward for o in outcomes], [o.observation for o in outcomes], action)
    q = Ops.broadcast_to(Ops.take(q_values, action), (1,))
    return Ops.sum(residual_product(Ops.take(b, slice(0, 1)), Ops.take(b, slice(1, 2)), q))


def s0_msbbe(agent: BenAgent, initial_state: np.ndarray, n_mc: int, rng: np.random.Generator) -> float:
    """MSBBE at the initial history under the prior, for monitoring."""
    window = TrajectoryBuffer(agent.builder, initial_state).window()
    point = unroll(agent.qnet, agent.omega, window)[-1]
    return msbbe_loss([point], agent.targets.using(agent.prior_posterior), n_mc, rng).item()


def prior_initialisation(
    agent: BenAgent,
    config: TrainConfig,
    initial_state: np.ndarray,
    rng: np.random.Generator,
    dataset: Optional[PriorDataset] = None,
    simulator: Optional[SearchRescueDynamics] = None,
) -> PretrainStats:
    """Fit the Q-network to the prior before any data is seen.

    Every step descends the MSBBE at s_0 with targets drawn from the prior,
    then, if the prior dataset is non-empty, the Bellman error of one
    dataset item.
    """
    stats = PretrainStats()
    prior_targets = agent.targets.using(agent.prior_posterior)
    window = TrajectoryBuffer(agent.builder, initial_state).window()
    use_dataset = dataset is not None and not dataset.is_empty
    omega_update = [(agent.omega, agent.omega_optimizer)]

    def s0_loss():
        point = unroll(agent.qnet, agent.omega, window)[-1]
        return msbbe_loss([point], prior_targets, config.n_mc, rng)

    for step in range(config.n_pretrain):
        stats.msbbe = _optimise(agent, "pretrain_msbbe", s0_loss, omega_update, step)
        stats.steps += 1
        if use_dataset:
            item = dataset.sample(rng)
            _optimise(agent, "pretrain_dataset", lambda: dataset_loss(agent, item, rng, simulator), omega_update, step)
            stats.dataset_steps += 1

    logger.info(
        "prior initialisation: %d steps, %d dataset steps, last MSBBE %.4g",
        stats.steps,
        stats.dataset_steps,
        stats.msbbe,
    )
    return stats


def posterior_updating(
    agent: BenAgent,
    config: TrainConfig,
    buffer: TrajectoryBuffer,
    rng: np.random.Generator,
    step: int = 0,
) -> UpdateStats:
    """``n_update`` rounds of ELBO steps on psi followed by one MSBBE step on omega.

    The Q-network is unrolled from h_init over the last ``truncation``
    transitions. Bootstrap samples are built with omega held fixed. The
    MSBBE is taken at the ends of ``msbbe_batch`` sub-histories h_0..h_k,
    with k uniform over the history under either schedule.
    """
    if len(buffer) == 0:
        raise ShapeError("posterior updating needs a history with at least one transition")
    stats = UpdateStats()
    elbo_updates = [(agent.psi, agent.psi_optimizer), (agent.model_params, agent.psi_optimizer)]
    omega_update = [(agent.omega, agent.omega_optimizer)]

    for _ in range(config.n_update):
        window = buffer.window(config.truncation)
        if agent.variational:
            samples = bootstrap(agent.qnet, agent.omega, agent.gamma, window)
            args = (agent.model, agent.model_params, agent.network, agent.psi)
            values = []
            if config.schedule == "interleaved":
                for sample in samples:
                    values.append(_optimise(
                        agent,
                        "elbo",
                        lambda: elbo_step_loss(*args, sample, agent.prior, config.n_mc, rng, len(samples)),
                        elbo_updates,
                        step,
                    ))
                stats.elbo = float(np.sum(values))
            else:
                for _ in range(config.n_posterior):
                    values.append(_optimise(
                        agent,
                        "elbo",
                        lambda: elbo_loss(*args, samples, agent.prior, config.n_mc, rng),
                        elbo_updates,
                        step,
                    ))
                stats.elbo = values[-1]
            stats.elbo_steps += len(values)

        stops = rng.integers(0, len(buffer) + 1, size=config.msbbe_batch)
        windows = [buffer.window(config.truncation, int(stop)) for stop in stops]

        def msbbe():
            points = [unroll(agent.qnet, agent.omega, sub)[-1] for sub in windows]
            return msbbe_loss(points, agent.targets, config.n_mc, rng)

        stats.msbbe = _optimise(agent, "msbbe", msbbe, omega_update, step)
        stats.msbbe_steps += 1

    logger.debug(
        "update at step %d: %d ELBO steps (%.4g), %d MSBBE steps (%.4g)",
        step,
        stats.elbo_steps,
        stats.elbo,
        stats.msbbe_steps,
        stats.msbbe,
    )
    return stats
