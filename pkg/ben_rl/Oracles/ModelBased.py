import numpy as np

from ..BenModel.BellmanTargets import EvaluationPoint
from ..DiffMath import ParamStore
from ..Environments.TigerBelief import TigerBelief
from ..Environments.TigerEnvironment import S0, TIGER_LEFT, TIGER_RIGHT, TigerDynamics, one_hot_state
from ..NetBlocks import RecurrentQNetwork


def marginal_bellman(
    qnet: RecurrentQNetwork,
    params: ParamStore,
    point: EvaluationPoint,
    action: int,
    dynamics: TigerDynamics,
    belief: TigerBelief,
    gamma: float,
) -> float:
    """Model-based Bayesian Bellman operator at one history, by exact enumeration.

    sum_phi P(phi | h) sum_(r, s') P(r, s' | a, phi) (r + gamma * max_a' Q(h + (a, r, s'), a')).
    """
    weights, rewards, next_states = [], [], []
    for phi, p_phi in ((TIGER_LEFT, belief.probability_left), (TIGER_RIGHT, 1.0 - belief.probability_left)):
        if p_phi == 0.0:
            continue
        for probability, reward, next_state in dynamics.outcomes(S0, action, phi):
            weights.append(p_phi * probability)
            rewards.append(reward)
            next_states.append(one_hot_state(next_state))
    rows = qnet.observations.encode_batch(rewards, next_states, [action] * len(rewards))
    _, next_q = qnet.step(params, point.encoding, rows)
    targets = np.asarray(rewards) + gamma * np.max(next_q.values, axis=1)
    return float(np.dot(weights, targets))
