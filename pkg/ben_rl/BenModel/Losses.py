"""Objectives of the two timescales and the predictive Bellman estimate.

* ``elbo_loss``: negative ELBO of the epistemic flow q_psi(phi) given
  bootstrap samples; the ELBO optimizer also trains the Bellman model's own
  hyper-parameters through it.
* ``msbbe_loss``: double-sampled mean squared Bayesian Bellman error with
  rho uniform over actions; the product (b - q)(b' - q) of two independent
  draws has the gradient of the squared expected residual.
* ``predictive_bellman``: Monte-Carlo estimate of E[b] under the posterior.
"""
from typing import Callable, Sequence, Tuple, Union

import numpy as np

from ..DiffMath import Ops, ParamStore, Tensor
from ..Errors import ConfigError, NotInvertibleError, ShapeError
from .BellmanModels import BellmanModel
from .BellmanTargets import EvaluationPoint
from .EpistemicNetwork import EpistemicNetwork
from .History import BootstrapSample, stack_samples
from .PriorSpec import PriorSpec


def _require_draws(n_mc: int):
    if n_mc < 1:
        raise ConfigError(f"n_mc must be at least 1, got {n_mc}")


def _mean_of(terms: Sequence[Tensor]) -> Tensor:
    stacked = Ops.concatenate([Ops.reshape(term, (1,)) for term in terms], axis=0)
    return Ops.mean(stacked)


def elbo_loss(
    model: BellmanModel,
    model_params: ParamStore,
    network: EpistemicNetwork,
    psi: ParamStore,
    samples: Sequence[BootstrapSample],
    prior: PriorSpec,
    n_mc: int,
    rng: np.random.Generator,
    prior_weight: float = 1.0,
) -> Tensor:
    """E_z[ sum_i -log p(b_i | q_i, h_i, phi) - w * (log p(phi) + log|det dphi/dz|) ], phi = t_psi(z).

    The first term is 0.5 * B^{-1}(b)^2 - log|d B^{-1} / db| per sample; the
    second is the prior plus the variational entropy, weighted by ``w``.
    """
    _require_draws(n_mc)
    if not samples:
        raise ShapeError("the ELBO needs at least one bootstrap sample")
    b, q, encodings = stack_samples(samples)
    n = len(samples)

    phi, logdet = network.sample(psi, Tensor(rng.standard_normal((n_mc, network.phi_dim))))
    draw_rows = np.repeat(np.arange(n_mc), n)
    sample_rows = np.tile(np.arange(n), n_mc)
    nll = model.negative_log_likelihood(
        model_params,
        Ops.take(phi, draw_rows),
        Ops.take(encodings, sample_rows),
        Ops.take(q, sample_rows),
        Ops.take(b, sample_rows),
        rng,
    )
    nll = Ops.sum(Ops.reshape(nll, (n_mc, n)), axis=1)
    regulariser = Ops.neg(Ops.add(prior.log_prob(phi), logdet))
    return Ops.mean(Ops.add(nll, Ops.mul(regulariser, prior_weight)))


def elbo_step_loss(
    model: BellmanModel,
    model_params: ParamStore,
    network: EpistemicNetwork,
    psi: ParamStore,
    sample: BootstrapSample,
    prior: PriorSpec,
    n_mc: int,
    rng: np.random.Generator,
    n_steps: int,
) -> Tensor:
    """L_t(psi; q_i, b_i): one sample's share, with the prior and entropy weighted 1 / n_steps.

    Summing over the ``n_steps`` samples of a window gives the full negative ELBO.
    """
    return elbo_loss(model, model_params, network, psi, [sample], prior, n_mc, rng, prior_weight=1.0 / n_steps)


def residual_product(b: Tensor, b_prime: Tensor, q: Tensor) -> Tensor:
    return Ops.mul(Ops.sub(b, q), Ops.sub(b_prime, q))


def msbbe_loss(points: Sequence[EvaluationPoint], targets, n_mc: int, rng: np.random.Generator) -> Tensor:
    """Mean over points and actions of (b - q_a)(b' - q_a) with n_mc independent pairs each.

    ``targets`` is a ``FlowTargets`` or ``TigerTargets``; its posterior draws
    are constants, so gradients flow only into the Q-network (through q and,
    where the targets bootstrap, through the next q-values).
    """
    _require_draws(n_mc)
    if not points:
        raise ShapeError("the MSBBE needs at least one evaluation point")
    terms = []
    for point in points:
        for action in range(point.q_values.shape[0]):
            draws = targets.sample(point, action, 2 * n_mc, rng)
            first = Ops.take(draws, slice(0, n_mc))
            second = Ops.take(draws, slice(n_mc, 2 * n_mc))
            terms.append(Ops.mean(residual_product(first, second, point.q(action, n_mc))))
    return _mean_of(terms)


def predictive_bellman(
    targets,
    point: EvaluationPoint,
    action: int,
    n_mc: int,
    rng: np.random.Generator,
    return_stderr: bool = False,
) -> Union[float, Tuple[float, float]]:
    _require_draws(n_mc)
    draws = targets.sample(point, action, n_mc, rng).values
    mean = float(np.mean(draws))
    if not return_stderr:
        return mean
    stderr = float(np.std(draws, ddof=1) / np.sqrt(n_mc)) if n_mc > 1 else 0.0
    return mean, stderr


def pushforward_log_density(
    reward_log_density: Callable[[np.ndarray], np.ndarray],
    bootstrap_inverse: Callable[[np.ndarray], np.ndarray],
    b,
    step: float = 1e-5,
) -> np.ndarray:
    """log p_b(b) = log p_r(beta^{-1}(b)) + log|d beta^{-1} / db| for an invertible 1-D bootstrap map."""
    b = np.asarray(b, dtype=np.float64)
    slope = (bootstrap_inverse(b + step) - bootstrap_inverse(b - step)) / (2.0 * step)
    if np.any(slope == 0.0):
        raise NotInvertibleError("the bootstrap map is flat somewhere on the grid")
    return reward_log_density(bootstrap_inverse(b)) + np.log(np.abs(slope))
