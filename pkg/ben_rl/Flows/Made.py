from typing import Optional, Sequence, Tuple

import numpy as np

from ..DiffMath import Ops, ParamStore, Tensor
from ..Errors import ConfigError

_hidden_activations = {"tanh": Ops.tanh, "relu": Ops.relu}


def autoregressive_masks(dim: int, hidden: Sequence[int]):
    """Connectivity masks such that output i only sees inputs 0..i-1.

    Inputs carry degrees 1..dim, hidden units cycle through 1..dim-1 and output
    i has degree i+1; a connection exists when the degree does not decrease
    (strictly increases into the outputs). With dim == 1 the hidden units
    carry degree 0 and see only the context.
    """
    in_degrees = np.arange(1, dim + 1)
    degrees = [in_degrees]
    for width in hidden:
        if dim > 1:
            degrees.append(np.arange(width) % (dim - 1) + 1)
        else:
            degrees.append(np.zeros(width, dtype=int))
    masks = [
        (later[None, :] >= earlier[:, None]).astype(np.float64)
        for earlier, later in zip(degrees[:-1], degrees[1:])
    ]
    output = (in_degrees[None, :] > degrees[-1][:, None]).astype(np.float64)
    return masks, output


class Made:
    """Masked autoencoder producing (shift, raw scale) for every dimension."""

    def __init__(
        self,
        dim: int,
        hidden: Sequence[int] = (16,),
        context_dim: int = 0,
        prefix: str = "made",
        activation: str = "tanh",
    ):
        if not hidden:
            raise ConfigError("A masked autoregressive block needs at least one hidden layer")
        if activation not in _hidden_activations:
            raise ConfigError(f"Unknown activation: {activation}")
        self.dim = dim
        self.hidden = tuple(int(h) for h in hidden)
        self.context_dim = context_dim
        self.prefix = prefix
        self.activation = _hidden_activations[activation]
        self.masks, output_mask = autoregressive_masks(dim, self.hidden)
        self.output_mask = np.concatenate([output_mask, output_mask], axis=1)

    def key(self, name: str) -> str:
        return f"{self.prefix}.{name}"

    def initialize(self, store: ParamStore, rng: np.random.Generator, zero_output: bool = True):
        widths = (self.dim,) + self.hidden
        for layer, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
            bound = 1.0 / np.sqrt(fan_in + (self.context_dim if layer == 0 else 0))
            store.add(self.key(f"{layer}.weight"), rng.uniform(-bound, bound, (fan_in, fan_out)))
            store.add(self.key(f"{layer}.bias"), rng.uniform(-bound, bound, fan_out))
            if layer == 0 and self.context_dim:
                store.add(self.key("context_weight"), rng.uniform(-bound, bound, (self.context_dim, fan_out)))
        bound = 1.0 / np.sqrt(self.hidden[-1])
        shape = (self.hidden[-1], 2 * self.dim)
        if zero_output:
            store.add(self.key("output.weight"), np.zeros(shape))
            store.add(self.key("output.bias"), np.zeros(2 * self.dim))
        else:
            store.add(self.key("output.weight"), rng.uniform(-bound, bound, shape))
            store.add(self.key("output.bias"), rng.uniform(-bound, bound, 2 * self.dim))

    def forward(self, params: ParamStore, x: Tensor, context: Optional[Tensor] = None) -> Tuple[Tensor, Tensor]:
        h = x
        for layer, mask in enumerate(self.masks):
            weight = Ops.mul(params[self.key(f"{layer}.weight")], Tensor(mask))
            h = Ops.affine(h, weight, params[self.key(f"{layer}.bias")])
            if layer == 0 and self.context_dim:
                h = Ops.add(h, Ops.matmul(context, params[self.key("context_weight")]))
            h = self.activation(h)
        weight = Ops.mul(params[self.key("output.weight")], Tensor(self.output_mask))
        out = Ops.affine(h, weight, params[self.key("output.bias")])
        shift = Ops.take(out, (slice(None), slice(0, self.dim)))
        raw_scale = Ops.take(out, (slice(None), slice(self.dim, 2 * self.dim)))
        return shift, raw_scale
