"""Differentiable primitives.

Each primitive computes its value with numpy, then registers a vector-Jacobian
product on the active tape. Elementwise binary ops follow numpy broadcasting;
their gradients are summed back to each operand's shape.
"""
from typing import Optional, Sequence, Union

import numpy as np
from scipy import special

from ..Errors import DomainError, ShapeError
from .Tensor import Tensor, as_tensor, record

Operand = Union[Tensor, float, np.ndarray]


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op_name: str, a: Tensor, b: Tensor):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError as exc:
        raise ShapeError(f"`{op_name}`: cannot broadcast {a.shape} with {b.shape}") from exc


def constant(values) -> Tensor:
    return Tensor(values)


def stop_gradient(x: Tensor) -> Tensor:
    return Tensor(as_tensor(x).values)


def add(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a, b)
    return record(
        "add",
        a.values + b.values,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("sub", a, b)
    return record(
        "sub",
        a.values - b.values,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)),
    )


def mul(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("mul", a, b)
    return record(
        "mul",
        a.values * b.values,
        (a, b),
        lambda g: (_unbroadcast(g * b.values, a.shape), _unbroadcast(g * a.values, b.shape)),
    )


def div(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("div", a, b)
    if np.any(b.values == 0.0):
        raise DomainError("`div` by zero")
    out = a.values / b.values
    return record(
        "div",
        out,
        (a, b),
        lambda g: (_unbroadcast(g / b.values, a.shape), _unbroadcast(-g * out / b.values, b.shape)),
    )


def neg(a: Operand) -> Tensor:
    a = as_tensor(a)
    return record("neg", -a.values, (a,), lambda g: (-g,))


def matmul(a: Operand, b: Operand) -> Tensor:
    """``a @ b`` for a vector or matrix ``a`` and a matrix ``b``."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim not in (1, 2) or b.ndim != 2 or a.shape[-1] != b.shape[0]:
        raise ShapeError(f"`matmul`: incompatible shapes {a.shape} and {b.shape}")

    def vjp(g):
        if a.ndim == 1:
            return g @ b.values.T, np.outer(a.values, g)
        return g @ b.values.T, a.values.T @ g

    return record("matmul", a.values @ b.values, (a, b), vjp)


def affine(x: Operand, weight: Tensor, bias: Tensor) -> Tensor:
    """``x @ weight + bias`` with ``weight`` of shape (in, out)."""
    x = as_tensor(x)
    if bias.shape != (weight.shape[-1],):
        raise ShapeError(f"`affine`: bias {bias.shape} does not match weight {weight.shape}")
    return add(matmul(x, weight), bias)


def matrix_inverse(a: Tensor) -> Tensor:
    a = as_tensor(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"`matrix_inverse` needs a square matrix, got {a.shape}")
    try:
        inv = np.linalg.inv(a.values)
    except np.linalg.LinAlgError as exc:
        raise DomainError("`matrix_inverse` of a singular matrix") from exc
    return record("matrix_inverse", inv, (a,), lambda g: (-inv.T @ g @ inv.T,))


def tanh(x: Operand) -> Tensor:
    x = as_tensor(x)
    out = np.tanh(x.values)
    return record("tanh", out, (x,), lambda g: (g * (1.0 - out * out),))


def sigmoid(x: Operand) -> Tensor:
    x = as_tensor(x)
    out = special.expit(x.values)
    return record("sigmoid", out, (x,), lambda g: (g * out * (1.0 - out),))


def relu(x: Operand) -> Tensor:
    x = as_tensor(x)
    mask = x.values > 0.0
    return record("relu", np.where(mask, x.values, 0.0), (x,), lambda g: (g * mask,))


def exp(x: Operand) -> Tensor:
    x = as_tensor(x)
    out = np.exp(x.values)
    return record("exp", out, (x,), lambda g: (g * out,))


def log(x: Operand) -> Tensor:
    x = as_tensor(x)
    if np.any(x.values <= 0.0):
        raise DomainError("`log` of a non-positive value")
    return record("log", np.log(x.values), (x,), lambda g: (g / x.values,))


def sqrt(x: Operand) -> Tensor:
    x = as_tensor(x)
    if np.any(x.values < 0.0):
        raise DomainError("`sqrt` of a negative value")
    out = np.sqrt(x.values)

    def vjp(g):
        if np.any(out == 0.0):
            raise DomainError("`sqrt` is not differentiable at 0")
        return (g * 0.5 / out,)

    return record("sqrt", out, (x,), vjp)


def abs(x: Operand) -> Tensor:  # noqa: A001 - mirrors numpy naming
    x = as_tensor(x)
    return record("abs", np.abs(x.values), (x,), lambda g: (g * np.sign(x.values),))


def square(x: Operand) -> Tensor:
    x = as_tensor(x)
    return record("square", x.values * x.values, (x,), lambda g: (2.0 * g * x.values,))


def softplus(x: Operand) -> Tensor:
    x = as_tensor(x)
    return record("softplus", np.logaddexp(0.0, x.values), (x,), lambda g: (g * special.expit(x.values),))


def sum(x: Operand, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    x = as_tensor(x)
    out = np.sum(x.values, axis=axis, keepdims=keepdims)

    def vjp(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return record("sum", np.asarray(out), (x,), vjp)


def mean(x: Operand, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    count = x.size if axis is None else x.shape[axis]
    return mul(sum(x, axis=axis, keepdims=keepdims), 1.0 / count)


def max(x: Operand, axis: int = -1) -> Tensor:  # noqa: A001
    """Maximum over ``axis``; the gradient goes to the first maximal entry."""
    x = as_tensor(x)
    axis = axis % x.ndim
    index = np.argmax(x.values, axis=axis)
    out = np.take_along_axis(x.values, np.expand_dims(index, axis), axis=axis)

    def vjp(g):
        grad = np.zeros_like(x.values)
        np.put_along_axis(grad, np.expand_dims(index, axis), np.expand_dims(g, axis), axis=axis)
        return (grad,)

    return record("max", np.squeeze(out, axis=axis), (x,), vjp)


def concatenate(tensors: Sequence[Operand], axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    try:
        out = np.concatenate([t.values for t in tensors], axis=axis)
    except ValueError as exc:
        raise ShapeError(f"`concatenate`: {exc}") from exc
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def vjp(g):
        return tuple(np.split(g, bounds, axis=axis))

    return record("concatenate", out, tensors, vjp)


def take(x: Operand, index) -> Tensor:
    """``x[index]`` for any numpy basic or fancy index."""
    x = as_tensor(x)
    try:
        out = x.values[index]
    except IndexError as exc:
        raise ShapeError(f"`take`: {exc}") from exc

    basic = all(
        isinstance(i, (int, np.integer, slice)) or i is Ellipsis or i is None
        for i in (index if isinstance(index, tuple) else (index,))
    )

    def vjp(g):
        grad = np.zeros_like(x.values)
        if basic:
            grad[index] += g
        else:
            np.add.at(grad, index, g)
        return (grad,)

    return record("take", np.array(out, dtype=np.float64), (x,), vjp)


def reshape(x: Operand, shape) -> Tensor:
    x = as_tensor(x)
    try:
        out = x.values.reshape(shape)
    except ValueError as exc:
        raise ShapeError(f"`reshape`: {exc}") from exc
    return record("reshape", out, (x,), lambda g: (g.reshape(x.shape),))


def broadcast_to(x: Operand, shape) -> Tensor:
    x = as_tensor(x)
    try:
        out = np.broadcast_to(x.values, shape).copy()
    except ValueError as exc:
        raise ShapeError(f"`broadcast_to`: {exc}") from exc
    return record("broadcast_to", out, (x,), lambda g: (_unbroadcast(g, x.shape),))


def transpose(x: Operand) -> Tensor:
    x = as_tensor(x)
    return record("transpose", x.values.T.copy(), (x,), lambda g: (g.T,))
