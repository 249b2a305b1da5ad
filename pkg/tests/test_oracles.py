import numpy as np
import pytest
from scipy import stats

from ben_rl.BenModel import ExactTigerPosterior, TigerTargets, TrajectoryBuffer, predictive_bellman, unroll
from ben_rl.DiffMath import ParamStore
from ben_rl.Environments import TigerBelief, TigerConfig, TigerDynamics
from ben_rl.Environments.TigerEnvironment import LISTEN, OPEN_LEFT, OPEN_RIGHT, one_hot_state
from ben_rl.Errors import ConfigError, ConvergenceError
from ben_rl.NetBlocks import QNetConfig, RecurrentQNetwork
from ben_rl.Oracles import (
    BayesOptimalPolicy,
    BeliefGrid,
    TigerAnalytic,
    bayes_optimal_action,
    belief_value_iteration,
    discount_horizon,
    listen_action,
    listen_policy,
    marginal_bellman,
    qbrl_policy,
    qbrl_policy_action,
    solve_tiger,
    tiger_rollouts,
)


@pytest.fixture(scope="module")
def solved():
    return solve_tiger()


class TestTigerAnalytic:
    def test_contextual_values(self):
        q_correct, q_wrong = TigerAnalytic().contextual_q_values()
        assert q_correct == pytest.approx(100.0)
        assert q_wrong == pytest.approx(-410.0)

    def test_no_discount(self):
        assert TigerAnalytic(gamma=0.0).contextual_q_values() == (10.0, -500.0)

    def test_qbrl_value(self):
        analytic = TigerAnalytic()
        assert analytic.qbrl_value(0.5) == pytest.approx(-155.0)
        assert analytic.qbrl_value(1.0) == pytest.approx(100.0)
        with pytest.raises(ConfigError):
            analytic.qbrl_value(1.5)

    def test_listen_value(self):
        assert TigerAnalytic().listen_value() == pytest.approx(-10.0)

    def test_follows_environment_config(self):
        analytic = TigerAnalytic.from_config(TigerConfig(r_gold=20.0, gamma=0.5))
        assert analytic.contextual_q_values().q_correct == pytest.approx(40.0)


class TestBeliefValueIteration:
    def test_known_context_fixed_point(self, solved):
        assert solved.value(1.0) == pytest.approx(100.0, abs=1e-6)
        assert solved.value(0.0) == pytest.approx(100.0, abs=1e-6)

    def test_uncertain_value_beats_listening_forever(self, solved):
        assert solved.value(0.5) > -10.0

    def test_symmetric_in_belief(self, solved):
        np.testing.assert_allclose(solved.values, solved.values[::-1], atol=1e-9)

    def test_residuals_never_grow(self, solved):
        assert solved.residuals[-1] < 1e-8
        assert np.all(np.diff(solved.residuals) <= 1e-12)

    def test_refining_the_grid_barely_moves_the_value(self, solved):
        finer = solve_tiger(resolution=4001)
        assert abs(finer.value(0.5) - solved.value(0.5)) < 1e-3

    def test_iteration_cap(self):
        with pytest.raises(ConvergenceError):
            belief_value_iteration(BeliefGrid(101), tol=1e-8, max_iterations=5)

    def test_grid_needs_three_points(self):
        with pytest.raises(ConfigError):
            BeliefGrid(2)


class TestPolicies:
    def test_bayes_optimal_actions(self, solved):
        assert bayes_optimal_action(solved, 0.5) == LISTEN
        assert bayes_optimal_action(solved, 1.0) == OPEN_RIGHT
        assert bayes_optimal_action(solved, 0.0) == OPEN_LEFT
        np.testing.assert_array_equal(bayes_optimal_action(solved, np.array([0.0, 0.5, 1.0])), [OPEN_LEFT, LISTEN, OPEN_RIGHT])

    def test_opening_at_even_odds_is_worse_than_listening(self, solved):
        values = solved.action_values(0.5)[0]
        assert values[OPEN_LEFT] == pytest.approx(-155.0)
        assert values[OPEN_RIGHT] == pytest.approx(-155.0)
        assert values[LISTEN] > values[OPEN_LEFT]

    def test_qbrl_mixture_at_even_odds(self, rng):
        actions = qbrl_policy_action(np.full(10000, 0.5), rng)
        assert set(np.unique(actions)) <= {OPEN_LEFT, OPEN_RIGHT}
        assert stats.binomtest(int(np.sum(actions == OPEN_RIGHT)), 10000, 0.5).pvalue > 1e-3

    def test_qbrl_with_known_side(self, rng):
        assert np.all(qbrl_policy_action(np.ones(100), rng) == OPEN_RIGHT)
        assert np.all(qbrl_policy_action(np.zeros(100), rng) == OPEN_LEFT)
        assert qbrl_policy_action(1.0, rng) == OPEN_RIGHT

    def test_listen_policy(self, rng):
        assert listen_action(0.3) == LISTEN
        np.testing.assert_array_equal(listen_policy(np.zeros(3), rng), [LISTEN] * 3)


class TestRollouts:
    def test_horizon_reaches_the_cutoff(self):
        horizon = discount_horizon(0.9)
        assert 0.9 ** horizon <= 1e-9 < 0.9 ** (horizon - 1)

    def test_listening_forever(self, rng):
        estimate = tiger_rollouts(listen_policy, 100, rng)
        assert estimate.mean == pytest.approx(-10.0, abs=1e-7)
        assert estimate.stderr == pytest.approx(0.0, abs=1e-12)

    def test_undiscounted_returns(self, rng):
        estimate = tiger_rollouts(listen_policy, 10, rng, horizon=11, discounted=False)
        np.testing.assert_array_equal(estimate.returns, -11.0)

    def test_return_ordering(self, solved):
        rng = np.random.default_rng(0)
        qbrl = tiger_rollouts(qbrl_policy, 10000, rng)
        listen = tiger_rollouts(listen_policy, 10000, rng)
        bayes = tiger_rollouts(BayesOptimalPolicy(solved), 10000, rng)

        assert abs(qbrl.mean - (-155.0)) < 3.0 * qbrl.stderr
        assert qbrl.mean + 3.0 * qbrl.stderr < listen.mean
        assert listen.mean < bayes.mean - 3.0 * bayes.stderr
        assert abs(bayes.mean - solved.value(0.5)) < 3.0 * bayes.stderr + 1e-2


class TestMarginalBellman:
    @pytest.mark.parametrize("action", [OPEN_LEFT, LISTEN], ids=["open", "listen"])
    def test_matches_exact_posterior_targets(self, action, rng):
        qnet = RecurrentQNetwork(QNetConfig(3, 3, hidden_dim=8, encoding_dim=2))
        params = ParamStore()
        qnet.initialize(params, rng)
        config = TigerConfig()
        buffer = TrajectoryBuffer(qnet.observations, one_hot_state(0))
        buffer.append(LISTEN, -1.0, one_hot_state(1))
        buffer.append(LISTEN, -1.0, one_hot_state(0))
        point = unroll(qnet, params, buffer.window())[-1]
        belief = TigerBelief(n1=1, config=config)
        dynamics = TigerDynamics(config)

        exact = marginal_bellman(qnet, params, point, action, dynamics, belief, config.gamma)
        targets = TigerTargets(qnet, params, dynamics, ExactTigerPosterior(belief), config.gamma)
        mean, stderr = predictive_bellman(targets, point, action, 100000, rng, return_stderr=True)
        assert abs(mean - exact) < 3.0 * stderr

    def test_revealed_side_is_deterministic_for_doors(self, rng):
        qnet = RecurrentQNetwork(QNetConfig(3, 3, hidden_dim=4, encoding_dim=2))
        params = ParamStore()
        qnet.initialize(params, rng)
        for key in params:
            params.set(key, np.zeros_like(params[key].values))
        point = unroll(qnet, params, TrajectoryBuffer(qnet.observations, one_hot_state(0)).window())[-1]
        belief = TigerBelief(revealed=0)
        value = marginal_bellman(qnet, params, point, OPEN_RIGHT, TigerDynamics(), belief, 0.9)
        assert value == 10.0
