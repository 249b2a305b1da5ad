"""Dense float64 tensors and the dynamic tape that records operations on them.

Operations performed inside ``with Tape() as tape:`` are appended to the
tape in execution order; ``tape.backward(root)`` walks the record in reverse
(which is a valid topological order) and accumulates ``.grad`` on every
leaf tensor created with ``requires_grad=True``.
"""
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..Errors import NonFiniteError, ShapeError

VjpFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_active_tapes: List["Tape"] = []


def active_tape() -> Optional["Tape"]:
    return _active_tapes[-1] if _active_tapes else None


class Tensor:
    __array_ufunc__ = None

    def __init__(self, values, requires_grad: bool = False, name: Optional[str] = None):
        self.values = np.array(values, dtype=np.float64)
        self.requires_grad = requires_grad
        self.name = name
        self.grad: Optional[np.ndarray] = np.zeros_like(self.values) if requires_grad else None
        self._is_leaf = True

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def size(self) -> int:
        return self.values.size

    def numpy(self) -> np.ndarray:
        return self.values.copy()

    def item(self) -> float:
        if self.values.size != 1:
            raise ShapeError(f"item() needs a single element, tensor has shape {self.shape}")
        return float(self.values.reshape(()))

    def detach(self) -> "Tensor":
        return Tensor(self.values)

    def zero_grad(self):
        if self.requires_grad:
            self.grad = np.zeros_like(self.values)

    def __repr__(self):
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    # operator sugar; the primitives live in Ops
    def __add__(self, other):
        from . import Ops
        return Ops.add(self, other)

    def __radd__(self, other):
        from . import Ops
        return Ops.add(other, self)

    def __sub__(self, other):
        from . import Ops
        return Ops.sub(self, other)

    def __rsub__(self, other):
        from . import Ops
        return Ops.sub(other, self)

    def __mul__(self, other):
        from . import Ops
        return Ops.mul(self, other)

    def __rmul__(self, other):
        from . import Ops
        return Ops.mul(other, self)

    def __truediv__(self, other):
        from . import Ops
        return Ops.div(self, other)

    def __rtruediv__(self, other):
        from . import Ops
        return Ops.div(other, self)

    def __neg__(self):
        from . import Ops
        return Ops.neg(self)

    def __matmul__(self, other):
        from . import Ops
        return Ops.matmul(self, other)

    def __getitem__(self, index):
        from . import Ops
        return Ops.take(self, index)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def check_finite(values: np.ndarray, op_name: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise NonFiniteError(f"`{op_name}` produced a non-finite value")
    return values


class _Node:
    __slots__ = ("output", "inputs", "vjp", "op_name")

    def __init__(self, output: Tensor, inputs: Tuple[Tensor, ...], vjp: VjpFn, op_name: str):
        self.output = output
        self.inputs = inputs
        self.vjp = vjp
        self.op_name = op_name


def record(op_name: str, values: np.ndarray, inputs: Sequence[Tensor], vjp: VjpFn) -> Tensor:
    """Wrap ``values`` as the output of ``op_name`` and put it on the active tape."""
    values = np.asarray(values, dtype=np.float64)
    check_finite(values, op_name)
    out = Tensor.__new__(Tensor)
    out.values = values
    out.name = None
    out.grad = None
    out._is_leaf = False
    out.requires_grad = any(t.requires_grad for t in inputs)

    tape = active_tape()
    if tape is not None and out.requires_grad:
        tape._nodes.append(_Node(out, tuple(inputs), vjp, op_name))
    return out


class Tape:
    def __init__(self):
        self._nodes: List[_Node] = []

    def __len__(self):
        return len(self._nodes)

    def __enter__(self) -> "Tape":
        _active_tapes.append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        popped = _active_tapes.pop()
        assert popped is self
        return False

    @property
    def op_names(self) -> List[str]:
        return [node.op_name for node in self._nodes]

    def backward(self, root: Tensor):
        if root.values.size != 1:
            raise ShapeError(f"backward needs a scalar root, got shape {root.shape}")

        pending = {id(root): np.ones_like(root.values)}
        if root._is_leaf and root.requires_grad:
            root.grad = pending[id(root)] if root.grad is None else root.grad + pending[id(root)]
            return

        for node in reversed(self._nodes):
            upstream = pending.pop(id(node.output), None)
            if upstream is None:
                continue
            input_grads = node.vjp(upstream)
            for tensor, grad in zip(node.inputs, input_grads):
                if grad is None or not tensor.requires_grad:
                    continue
                grad = np.asarray(grad, dtype=np.float64)
                if grad.shape != tensor.shape:
                    raise ShapeError(
                        f"`{node.op_name}` returned a gradient of shape {grad.shape} for an input of shape {tensor.shape}"
                    )
                check_finite(grad, f"{node.op_name} (backward)")
                if tensor._is_leaf:
                    tensor.grad = grad.copy() if tensor.grad is None else tensor.grad + grad
                else:
                    key = id(tensor)
                    pending[key] = pending[key] + grad if key in pending else grad


def backward(tape: Tape, root: Tensor):
    tape.backward(root)
