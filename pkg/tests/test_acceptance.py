"""End-to-end learning checks on the bundled presets. Minutes to tens of minutes."""
import numpy as np
import pytest
from scipy import stats

from ben_rl.BenModel import TrajectoryBuffer
from ben_rl.Cli import resolve_run_config
from ben_rl.Environments import TigerDynamics
from ben_rl.Environments.TigerEnvironment import LISTEN, S0, one_hot_state
from ben_rl.Oracles import BayesOptimalPolicy, bayes_optimal_action, qbrl_policy, solve_tiger, tiger_rollouts
from ben_rl.Trainer import build_agent, posterior_updating, prior_initialisation, run_seed

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def solved():
    return solve_tiger()


def _per_seed(config):
    """(return, hazards hit) of every seed, each summed over its episodes."""
    env = config.build_environment()
    results = {}
    for seed in config.seeds:
        metrics = run_seed(env, config.train, seed, config.qnet, config.aleatoric)
        results[seed] = (
            sum(metrics.episode_returns().values()),
            sum(metrics.episode_totals("hazards_hit").values()),
        )
    return results


def _zero_shot(variant):
    config = resolve_run_config(preset="sar_zero_shot")
    return config.with_overrides(dict(config.variants)[variant])


def test_tiger_agent_closes_most_of_the_gap_to_bayes_optimal(solved):
    config = resolve_run_config(preset="tiger")
    assert len(config.seeds) >= 20
    horizon = config.train.max_steps
    returns = np.array([total for total, _ in _per_seed(config).values()])

    rng = np.random.default_rng(0)
    qbrl = tiger_rollouts(qbrl_policy, 20000, rng, horizon=horizon, discounted=False)
    bayes = tiger_rollouts(BayesOptimalPolicy(solved), 20000, rng, horizon=horizon, discounted=False)
    assert qbrl.mean + 3.0 * qbrl.stderr < bayes.mean

    median = float(np.median(returns))
    assert median > qbrl.mean + 3.0 * qbrl.stderr
    assert median >= qbrl.mean + 0.8 * (bayes.mean - qbrl.mean)


def test_greedy_action_after_listening_matches_bayes_optimal(solved):
    config = resolve_run_config(preset="tiger")
    env = config.build_environment()
    dynamics = TigerDynamics(env.config)
    matches = 0
    for seed in config.seeds:
        rng = np.random.default_rng(seed)
        agent = build_agent(env, config.train, rng, config.qnet, config.aleatoric)
        prior_initialisation(agent, config.train, one_hot_state(S0), rng)
        agent.reset_posterior()
        buffer = TrajectoryBuffer(agent.builder, one_hot_state(S0))
        phi = int(rng.integers(2))
        for _ in range(3):
            reward, next_state = dynamics.sample(S0, LISTEN, phi, rng)
            buffer.append(LISTEN, reward, one_hot_state(next_state))
            agent.observe(LISTEN, reward, one_hot_state(next_state))
            posterior_updating(agent, config.train, buffer, rng)

        greedy = agent.greedy_action(agent.q_values(buffer.window(config.train.truncation)))
        matches += int(greedy == bayes_optimal_action(solved, agent.posterior.belief.probability_left))
    assert matches >= 0.8 * len(config.seeds)


def test_recurrent_agent_beats_contextual_in_zero_shot_search():
    recurrent, contextual = _per_seed(_zero_shot("ben")), _per_seed(_zero_shot("contextual"))
    seeds = sorted(recurrent)
    assert len(seeds) >= 5

    wins = sum(recurrent[seed][0] > contextual[seed][0] for seed in seeds)
    assert stats.binomtest(wins, len(seeds), alternative="greater").pvalue < 0.05
    recurrent_hazards = sum(recurrent[seed][1] for seed in seeds)
    contextual_hazards = sum(contextual[seed][1] for seed in seeds)
    assert contextual_hazards >= 3 * recurrent_hazards


def test_pretraining_raises_zero_shot_return():
    pretrained_config = _zero_shot("ben")
    assert pretrained_config.train.n_pretrain > 0
    pretrained = _per_seed(pretrained_config)
    untrained = _per_seed(pretrained_config.with_overrides({"train": {"n_pretrain": 0}}))
    seeds = sorted(pretrained)

    wins = sum(pretrained[seed][0] > untrained[seed][0] for seed in seeds)
    assert wins >= len(seeds) - 1
    assert np.median([pretrained[s][0] for s in seeds]) > np.median([untrained[s][0] for s in seeds])
