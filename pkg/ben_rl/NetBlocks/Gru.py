from dataclasses import dataclass

import numpy as np

from ..DiffMath import Ops, ParamStore, Tensor
from ..DiffMath.Tensor import as_tensor
from ..Errors import ShapeError

_gates = ("reset", "update", "candidate")


@dataclass(frozen=True)
class GruState:
    hidden: Tensor

    @classmethod
    def zeros(cls, width: int) -> "GruState":
        return cls(Tensor(np.zeros(width)))


class GruCell:
    """Gated recurrent unit.

    r = sigmoid(x Wxr + h Whr + br), u = sigmoid(x Wxu + h Whu + bu),
    n = tanh(x Wxn + bxn + r * (h Whn + bhn)), h' = (1 - u) * n + u * h.
    Starting from |h| < 1 every later hidden state stays inside (-1, 1).
    """

    def __init__(self, input_dim: int, hidden_dim: int, prefix: str = "gru"):
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.prefix = prefix

    def key(self, name: str) -> str:
        return f"{self.prefix}.{name}"

    def initialize(self, store: ParamStore, rng: np.random.Generator):
        bound = 1.0 / np.sqrt(self.hidden_dim)
        for gate in _gates:
            store.add(self.key(f"{gate}.input_weight"), rng.uniform(-bound, bound, (self.input_dim, self.hidden_dim)))
            store.add(self.key(f"{gate}.hidden_weight"), rng.uniform(-bound, bound, (self.hidden_dim, self.hidden_dim)))
            store.add(self.key(f"{gate}.bias"), rng.uniform(-bound, bound, self.hidden_dim))
        store.add(self.key("candidate.hidden_bias"), rng.uniform(-bound, bound, self.hidden_dim))

    def step(self, params: ParamStore, state: GruState, x) -> GruState:
        x = as_tensor(x)
        h = state.hidden
        if x.shape[-1] != self.input_dim:
            raise ShapeError(f"GRU `{self.prefix}` expects input width {self.input_dim}, got shape {x.shape}")
        if h.shape[-1] != self.hidden_dim:
            raise ShapeError(f"GRU `{self.prefix}` expects hidden width {self.hidden_dim}, got shape {h.shape}")

        def gate_preactivation(gate):
            return Ops.add(
                Ops.affine(x, params[self.key(f"{gate}.input_weight")], params[self.key(f"{gate}.bias")]),
                Ops.matmul(h, params[self.key(f"{gate}.hidden_weight")]),
            )

        reset = Ops.sigmoid(gate_preactivation("reset"))
        update = Ops.sigmoid(gate_preactivation("update"))
        recurrent = Ops.affine(
            h, params[self.key("candidate.hidden_weight")], params[self.key("candidate.hidden_bias")]
        )
        candidate = Ops.tanh(
            Ops.add(
                Ops.affine(x, params[self.key("candidate.input_weight")], params[self.key("candidate.bias")]),
                Ops.mul(reset, recurrent),
            )
        )
        hidden = Ops.add(Ops.mul(Ops.sub(1.0, update), candidate), Ops.mul(update, h))
        return GruState(hidden)


def gru_step(cell: GruCell, params: ParamStore, state: GruState, x) -> GruState:
    return cell.step(params, state, x)
