from .BeliefValueIteration import BeliefGrid, belief_value_iteration, solve_tiger
from .ModelBased import marginal_bellman
from .Policies import (
    BayesOptimalPolicy,
    bayes_optimal_action,
    listen_action,
    listen_policy,
    qbrl_policy,
    qbrl_policy_action,
)
from .Rollouts import RolloutEstimate, discount_horizon, tiger_rollouts
from .TigerAnalytic import ContextualValues, TigerAnalytic, contextual_q_values, qbrl_value
