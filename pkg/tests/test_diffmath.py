import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ben_rl.DiffMath import Adam, Ops, ParamStore, Tape, Tensor, adam_step
from ben_rl.Errors import ConfigError, DomainError, NonFiniteError, ShapeError

fixture_settings = settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
bounded = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)
positive = st.floats(0.1, 5.0, allow_nan=False, allow_infinity=False)
away_from_zero = st.one_of(st.floats(-3.0, -1e-2), st.floats(1e-2, 3.0))


def _weighted(op, weights):
    return lambda x: Ops.sum(Ops.mul(op(x), weights))


def test_relu_clamps_negatives():
    np.testing.assert_array_equal(Ops.relu(Tensor([-1.0, 0.0, 2.0])).values, [0.0, 0.0, 2.0])


def test_identity_matmul():
    x = np.arange(12.0).reshape(3, 4)
    np.testing.assert_array_equal(Ops.matmul(Tensor(np.eye(3)), Tensor(x)).values, x)


def test_tanh_value():
    assert Ops.tanh(Tensor(0.5)).item() == pytest.approx(0.46211715726, abs=1e-10)


def test_sum_of_squares_gradient():
    p = Tensor([1.0, 2.0], requires_grad=True)
    with Tape() as tape:
        root = Ops.sum(Ops.square(p))
    tape.backward(root)
    np.testing.assert_allclose(p.grad, [2.0, 4.0])


def test_constant_root_has_zero_gradient():
    p = Tensor([1.0, -2.0], requires_grad=True)
    with Tape() as tape:
        root = Ops.sum(Ops.mul(Ops.stop_gradient(p), 3.0))
    tape.backward(root)
    np.testing.assert_array_equal(p.grad, [0.0, 0.0])


def test_gradients_accumulate_over_shared_inputs():
    p = Tensor(3.0, requires_grad=True)
    with Tape() as tape:
        root = p * p + p
    tape.backward(root)
    assert float(p.grad) == pytest.approx(7.0)


def test_backward_needs_scalar_root():
    p = Tensor([1.0, 2.0], requires_grad=True)
    with Tape() as tape:
        out = Ops.square(p)
    with pytest.raises(ShapeError):
        tape.backward(out)


def test_domain_errors():
    with pytest.raises(DomainError):
        Ops.log(Tensor([1.0, 0.0]))
    with pytest.raises(DomainError):
        Ops.sqrt(Tensor(-1.0))
    with pytest.raises(DomainError):
        Ops.div(1.0, Tensor([0.0]))


def test_shape_mismatch_raises():
    with pytest.raises(ShapeError):
        Ops.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))
    with pytest.raises(ShapeError):
        Ops.add(Tensor(np.ones(3)), Tensor(np.ones(2)))


def test_overflow_raises_instead_of_inf():
    with pytest.raises(NonFiniteError):
        Ops.exp(Tensor(1000.0))


def test_max_routes_gradient_to_first_maximum():
    x = Tensor([[1.0, 3.0, 3.0], [2.0, 0.0, 2.0]], requires_grad=True)
    with Tape() as tape:
        root = Ops.sum(Ops.max(x, axis=-1))
    tape.backward(root)
    np.testing.assert_array_equal(x.grad, [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])


def test_operations_outside_a_tape_are_not_recorded():
    with Tape() as tape:
        pass
    Ops.add(Tensor(1.0, requires_grad=True), 2.0)
    assert len(tape) == 0


def test_replay_is_bitwise_deterministic(rng):
    values = rng.normal(size=(4, 3))
    weight = rng.normal(size=(3, 2))

    def forward():
        x = Tensor(values)
        return Ops.softplus(Ops.affine(x, Tensor(weight), Tensor([0.1, -0.2]))).values

    np.testing.assert_array_equal(forward(), forward())


@pytest.mark.parametrize(
    "op, strategy",
    [
        (Ops.tanh, bounded),
        (Ops.sigmoid, bounded),
        (Ops.exp, bounded),
        (Ops.square, bounded),
        (Ops.softplus, bounded),
        (Ops.log, positive),
        (Ops.sqrt, positive),
        (Ops.neg, bounded),
    ],
    ids=["tanh", "sigmoid", "exp", "square", "softplus", "log", "sqrt", "neg"],
)
def test_smooth_unary_gradients(op, strategy, gradient_error):
    @fixture_settings
    @given(arrays(np.float64, (2, 3), elements=strategy))
    def check(values):
        weights = np.linspace(-1.0, 1.5, 6).reshape(2, 3)
        assert gradient_error(_weighted(op, weights), values) < 1e-4

    check()


@pytest.mark.parametrize("op", [Ops.relu, Ops.abs], ids=["relu", "abs"])
def test_kinked_unary_gradients(op, gradient_error):
    @fixture_settings
    @given(arrays(np.float64, (5,), elements=away_from_zero))
    def check(values):
        assert gradient_error(_weighted(op, np.arange(1.0, 6.0)), values) < 1e-4

    check()


@fixture_settings
@given(left=arrays(np.float64, (3, 2), elements=bounded), right=arrays(np.float64, (2,), elements=positive))
def test_broadcast_binary_gradients(left, right, gradient_error):
    for op in (Ops.add, Ops.sub, Ops.mul, Ops.div):
        assert gradient_error(lambda x: Ops.sum(Ops.square(op(x, Tensor(right)))), left) < 1e-4
        assert gradient_error(lambda y: Ops.sum(Ops.square(op(Tensor(left), y))), right) < 1e-4


@fixture_settings
@given(a=arrays(np.float64, (2, 3), elements=bounded), b=arrays(np.float64, (3, 4), elements=bounded))
def test_matmul_and_affine_gradients(a, b, gradient_error):
    bias = Tensor(np.linspace(-1, 1, 4))
    assert gradient_error(lambda x: Ops.sum(Ops.tanh(Ops.affine(x, Tensor(b), bias))), a) < 1e-4
    assert gradient_error(lambda w: Ops.sum(Ops.tanh(Ops.affine(Tensor(a), w, bias))), b) < 1e-4
    assert gradient_error(lambda v: Ops.sum(Ops.square(Ops.matmul(v, Tensor(b)))), a[0]) < 1e-4


@fixture_settings
@given(values=arrays(np.float64, (4, 3), elements=bounded), offsets=st.permutations([0.0, 10.0, 20.0]))
def test_max_gradient_away_from_ties(values, offsets, gradient_error):
    spread = values + np.asarray(offsets)
    assert gradient_error(lambda x: Ops.sum(Ops.square(Ops.max(x, axis=-1))), spread) < 1e-4


@fixture_settings
@given(values=arrays(np.float64, (3, 4), elements=bounded))
def test_shape_op_gradients(values, gradient_error):
    weights = np.arange(12.0).reshape(4, 3)
    checks = [
        lambda x: Ops.sum(Ops.mul(Ops.transpose(x), weights)),
        lambda x: Ops.sum(Ops.square(Ops.reshape(x, (2, 6)))),
        lambda x: Ops.sum(Ops.square(Ops.take(x, (slice(None), [0, 2, 2])))),
        lambda x: Ops.sum(Ops.square(Ops.concatenate([x, Ops.tanh(x)], axis=0))),
        lambda x: Ops.sum(Ops.square(Ops.mean(x, axis=0))),
        lambda x: Ops.sum(Ops.square(Ops.sum(x, axis=1, keepdims=True))),
        lambda x: Ops.sum(Ops.square(Ops.broadcast_to(Ops.take(x, 0), (2, 4)))),
    ]
    for fn in checks:
        assert gradient_error(fn, values) < 1e-4


def test_matrix_inverse_gradient(gradient_error):
    values = np.array([[2.0, 0.3], [-0.4, 1.5]])
    assert gradient_error(lambda a: Ops.sum(Ops.square(Ops.matrix_inverse(a))), values) < 1e-4


def test_param_store_rejects_duplicates_and_bad_shapes():
    store = ParamStore("omega")
    store.add("w", np.zeros(3))
    with pytest.raises(ConfigError):
        store.add("w", np.zeros(3))
    with pytest.raises(ShapeError):
        store.set("w", np.zeros(2))
    assert store.num_parameters == 3


def test_param_store_state_round_trip_resets_moments():
    store = ParamStore()
    p = store.add("w", [1.0, 2.0])
    saved = store.state_dict()
    p.grad = np.array([1.0, -1.0])
    adam_step(store, lr=0.1)
    saved["w"][0] = 9.0
    assert store["w"].values[0] != 9.0

    store.load_state_dict({"w": np.array([1.0, 2.0])})
    np.testing.assert_array_equal(store["w"].values, [1.0, 2.0])
    np.testing.assert_array_equal(store.first_moment["w"], 0.0)
    assert store.step_count == 0
    with pytest.raises(ConfigError):
        store.load_state_dict({})


def test_adam_first_step_moves_by_learning_rate():
    store = ParamStore()
    p = store.add("p", 0.0)
    p.grad = np.array(1.0)
    adam_step(store, lr=0.1)
    assert float(p.values) == pytest.approx(-0.1, rel=1e-6)
    assert store.step_count == 1
    assert float(p.grad) == 0.0


def test_adam_zero_gradient_leaves_parameter():
    store = ParamStore()
    p = store.add("p", [0.5, -0.5])
    Adam(lr=0.1).step(store)
    np.testing.assert_array_equal(p.values, [0.5, -0.5])


def test_adam_is_deterministic():
    stores = [ParamStore(), ParamStore()]
    for store in stores:
        store.add("p", [0.3, -1.2])
        store["p"].grad = np.array([0.7, -2.0])
        Adam(lr=0.05, clip_norm=1.0).step(store)
    np.testing.assert_array_equal(stores[0]["p"].values, stores[1]["p"].values)


def test_adam_rejects_non_finite_gradient():
    store = ParamStore()
    store.add("p", 1.0).grad = np.array(np.nan)
    with pytest.raises(NonFiniteError):
        adam_step(store, lr=0.1)


def test_adam_clips_by_global_norm():
    clipped, raw = ParamStore(), ParamStore()
    for store in (clipped, raw):
        store.add("a", [0.0])
        store.add("b", [0.0])
        store["a"].grad = np.array([30.0])
        store["b"].grad = np.array([40.0])
    adam_step(clipped, lr=0.1, clip_norm=10.0)
    assert clipped.first_moment["a"][0] == pytest.approx(0.1 * 6.0)
    adam_step(raw, lr=0.1, clip_norm=None)
    assert raw.first_moment["a"][0] == pytest.approx(0.1 * 30.0)
