import numpy as np
import pytest
from scipy.special import expit

from ben_rl.DiffMath import Ops, ParamStore, Tensor
from ben_rl.Environments import SearchRescueConfig
from ben_rl.Errors import ConfigError, ShapeError
from ben_rl.NetBlocks import (
    GruCell,
    GruState,
    Mlp,
    MlpSpec,
    Observation,
    ObservationBuilder,
    QNetConfig,
    RecurrentQNetwork,
    gru_step,
    mlp_forward,
    qnet_step,
)


def _qnet(rng, **kwargs):
    config = QNetConfig(**{"state_dim": 3, "n_actions": 3, "hidden_dim": 8, "encoding_dim": 4, **kwargs})
    qnet = RecurrentQNetwork(config)
    params = ParamStore("omega")
    qnet.initialize(params, rng)
    return qnet, params


def test_mlp_spec_validation():
    with pytest.raises(ConfigError):
        MlpSpec((3,), ())
    with pytest.raises(ConfigError):
        MlpSpec((3, 0), ("relu",))
    with pytest.raises(ConfigError):
        MlpSpec((3, 2), ("gelu",))
    assert MlpSpec.build((4, 8, 2)).activations == ("relu", "none")


def test_zero_mlp_outputs_zero(rng):
    mlp = Mlp(MlpSpec.build((3, 5, 2)))
    params = ParamStore()
    mlp.initialize(params, rng)
    for key in params:
        params.set(key, np.zeros_like(params[key].values))
    np.testing.assert_array_equal(mlp.forward(params, rng.normal(size=3)).values, [0.0, 0.0])


def test_identity_layer_returns_input():
    spec = MlpSpec((3, 3), ("none",))
    params = ParamStore()
    params.add("mlp.0.weight", np.eye(3))
    params.add("mlp.0.bias", np.zeros(3))
    x = np.array([0.5, -2.0, 7.0])
    np.testing.assert_array_equal(mlp_forward(spec, params, x).values, x)


def test_mlp_matches_reference_arithmetic(rng):
    mlp = Mlp(MlpSpec.build((4, 6, 3), hidden_activation="tanh"), prefix="net")
    params = ParamStore()
    mlp.initialize(params, rng)
    x = rng.normal(size=(5, 4))
    hidden = np.tanh(x @ params["net.0.weight"].values + params["net.0.bias"].values)
    expected = hidden @ params["net.1.weight"].values + params["net.1.bias"].values
    np.testing.assert_allclose(mlp.forward(params, x).values, expected, atol=1e-12)


def test_mlp_rejects_wrong_width(rng):
    mlp = Mlp(MlpSpec.build((4, 2)))
    params = ParamStore()
    mlp.initialize(params, rng)
    with pytest.raises(ShapeError):
        mlp.forward(params, np.zeros(3))


def test_zero_gru_keeps_zero_hidden(rng):
    cell = GruCell(3, 2)
    params = ParamStore()
    cell.initialize(params, rng)
    for key in params:
        params.set(key, np.zeros_like(params[key].values))
    state = gru_step(cell, params, GruState.zeros(2), np.zeros(3))
    np.testing.assert_array_equal(state.hidden.values, [0.0, 0.0])


def test_gru_hidden_stays_in_open_interval(rng):
    cell = GruCell(4, 6)
    params = ParamStore()
    cell.initialize(params, rng)
    inputs = rng.normal(scale=10.0, size=(1000, 4))
    state = cell.step(params, GruState(Tensor(np.zeros((1000, 6)))), inputs)
    assert np.all(np.abs(state.hidden.values) < 1.0)
    assert np.all(np.isfinite(state.hidden.values))


def test_single_unit_gru_matches_hand_computation():
    cell = GruCell(1, 1)
    params = ParamStore()
    values = {
        "reset.input_weight": 0.5, "reset.hidden_weight": -0.3, "reset.bias": 0.1,
        "update.input_weight": -0.2, "update.hidden_weight": 0.4, "update.bias": 0.2,
        "candidate.input_weight": 0.7, "candidate.hidden_weight": 0.6, "candidate.bias": -0.1,
        "candidate.hidden_bias": 0.05,
    }
    for name, value in values.items():
        shape = (1, 1) if "weight" in name else (1,)
        params.add(f"gru.{name}", np.full(shape, value))

    x, h = 0.8, 0.3
    r = expit(0.5 * x + 0.1 - 0.3 * h)
    u = expit(-0.2 * x + 0.2 + 0.4 * h)
    n = np.tanh(0.7 * x - 0.1 + r * (0.6 * h + 0.05))
    expected = (1.0 - u) * n + u * h

    state = cell.step(params, GruState(Tensor([h])), np.array([x]))
    assert state.hidden.values[0] == pytest.approx(expected, abs=1e-12)


def test_observation_layout():
    builder = ObservationBuilder(state_dim=2, n_actions=3, reward_scale=0.5)
    initial = builder.initial(np.array([1.0, 2.0]))
    np.testing.assert_array_equal(builder.encode(initial), [0.0, 1.0, 2.0, 0.0, 0.0, 0.0])
    later = builder.build(-4.0, np.array([0.0, 1.0]), 1)
    np.testing.assert_array_equal(builder.encode(later), [-2.0, 0.0, 1.0, 0.0, 1.0, 0.0])
    rows = builder.encode_batch([-4.0, 2.0], [[0.0, 1.0], [1.0, 1.0]], [1, 2])
    np.testing.assert_array_equal(rows[0], builder.encode(later))
    with pytest.raises(ShapeError):
        Observation(0.0, np.zeros(2), np.array([1.0, 1.0, 0.0]))


def test_tiger_qnet_has_three_outputs(rng):
    qnet, params = _qnet(rng, hidden_dim=32, encoding_dim=2)
    _, q_values = qnet.step(params, qnet.initial_state(), qnet.observations.initial(np.array([1.0, 0.0, 0.0])))
    assert q_values.shape == (3,)


def test_search_rescue_qnet_has_five_outputs(rng):
    config = SearchRescueConfig()
    qnet, params = _qnet(rng, state_dim=config.state_dim, n_actions=5, hidden_dim=64, encoding_dim=64)
    _, q_values = qnet_step(qnet, params, qnet.initial_state(), qnet.observations.initial(np.zeros(config.state_dim)))
    assert q_values.shape == (5,)


def test_qnet_step_is_deterministic(rng):
    qnet, params = _qnet(rng)
    observation = qnet.observations.build(-1.0, np.array([0.0, 1.0, 0.0]), 2)
    state = GruState(Tensor([0.1, -0.2, 0.3, 0.0]))
    first = qnet.step(params, state, observation)
    second = qnet.step(params, state, observation)
    np.testing.assert_array_equal(first[1].values, second[1].values)
    np.testing.assert_array_equal(first[0].hidden.values, second[0].hidden.values)


def test_batched_rows_match_single_steps(rng):
    qnet, params = _qnet(rng)
    builder = qnet.observations
    rows = builder.encode_batch([-1.0, 10.0], [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]], [2, 0])
    state = GruState(Tensor([0.1, -0.2, 0.3, 0.0]))
    _, batched = qnet.step(params, state, rows)
    for i in range(2):
        _, single = qnet.step(params, state, rows[i])
        np.testing.assert_allclose(batched.values[i], single.values, atol=1e-12)


def test_contextual_qnet_ignores_history(rng):
    qnet, params = _qnet(rng, history_mode="contextual")
    builder = qnet.observations
    target = builder.build(-1.0, np.array([0.0, 0.0, 1.0]), 2)
    prefixes = [
        [builder.initial(np.array([1.0, 0.0, 0.0]))],
        [builder.initial(np.array([1.0, 0.0, 0.0])), builder.build(10.0, np.array([1.0, 0.0, 0.0]), 1)],
    ]
    outputs = [qnet.unroll(params, prefix + [target])[-1][1].values for prefix in prefixes]
    np.testing.assert_array_equal(outputs[0], outputs[1])
    assert qnet.encoding_dim == 3


def test_unrolled_gradient_matches_finite_differences(rng, param_gradient_error):
    qnet, params = _qnet(rng)
    builder = qnet.observations
    observations = [builder.initial(np.array([1.0, 0.0, 0.0]))]
    for t in range(9):
        action = int(rng.integers(3))
        state = np.eye(3)[int(rng.integers(3))]
        observations.append(builder.build(float(rng.normal(scale=5.0)), state, action))

    def loss():
        outputs = qnet.unroll(params, observations)
        return Ops.sum(Ops.concatenate([Ops.square(q) for _, q in outputs]))

    for key in ("qnet.input.0.weight", "qnet.gru.update.hidden_weight", "qnet.gru.candidate.hidden_bias", "qnet.output.1.bias"):
        assert param_gradient_error(params, key, loss) < 1e-4


@pytest.mark.parametrize("history_mode", ["recurrent", "contextual"])
def test_q_scale_multiplies_the_output_layer(history_mode):
    outputs = []
    for q_scale in (1.0, 100.0):
        qnet, params = _qnet(np.random.default_rng(3), history_mode=history_mode, q_scale=q_scale)
        observation = qnet.observations.build(-1.0, np.array([0.0, 1.0, 0.0]), 2)
        outputs.append(qnet.step(params, qnet.initial_state(), observation)[1].values)
    np.testing.assert_allclose(outputs[1], 100.0 * outputs[0], rtol=1e-12)
    with pytest.raises(ConfigError):
        QNetConfig(3, 3, q_scale=0.0)
