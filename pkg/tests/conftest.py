import numpy as np
import pytest

from ben_rl.DiffMath import Tape, Tensor


def numeric_gradient(fn, values, step=1e-6):
    """Central differences of the scalar ``fn(ndarray) -> float`` at ``values``."""
    values = np.array(values, dtype=np.float64)
    grad = np.zeros_like(values)
    for index in np.ndindex(values.shape):
        shifted = values.copy()
        shifted[index] += step
        upper = fn(shifted)
        shifted[index] -= 2.0 * step
        lower = fn(shifted)
        grad[index] = (upper - lower) / (2.0 * step)
    return grad


def tape_gradient(fn, values):
    """Gradient of the scalar tensor ``fn(Tensor)`` by a tape backward pass."""
    x = Tensor(values, requires_grad=True)
    with Tape() as tape:
        out = fn(x)
    tape.backward(out)
    return x.grad


def relative_error(analytic, numeric):
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    scale = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), 1e-8)
    return float(np.linalg.norm(analytic - numeric) / scale)


class GradientChecker:
    def __init__(self, step=1e-6):
        self.step = step

    def __call__(self, fn, values):
        """Relative error between the tape gradient and central differences of ``fn``."""
        analytic = tape_gradient(fn, values)
        numeric = numeric_gradient(lambda v: fn(Tensor(v)).item(), values, self.step)
        return relative_error(analytic, numeric)


@pytest.fixture
def gradient_error():
    return GradientChecker()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def finite_difference():
    return numeric_gradient


@pytest.fixture
def param_gradient_error():
    """Relative error of the tape gradient of ``loss()`` w.r.t. ``store[key]``."""

    def check(store, key, loss, step=1e-6):
        store.zero_grad()
        with Tape() as tape:
            root = loss()
        tape.backward(root)
        analytic = store[key].grad.copy()
        original = store[key].values.copy()

        def evaluate(values):
            store.set(key, values)
            return loss().item()

        numeric = numeric_gradient(evaluate, original, step)
        store.set(key, original)
        store.zero_grad()
        return relative_error(analytic, numeric)

    return check
