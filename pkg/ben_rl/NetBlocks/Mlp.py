from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from ..DiffMath import Ops, ParamStore, Tensor
from ..DiffMath.Tensor import as_tensor
from ..Errors import ConfigError, ShapeError

_activations = {
    "relu": Ops.relu,
    "tanh": Ops.tanh,
    "none": lambda x: x,
}


@dataclass(frozen=True)
class MlpSpec:
    """Layer widths ``(in, h1, ..., out)`` and one activation per affine layer."""

    widths: Tuple[int, ...]
    activations: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        object.__setattr__(self, "activations", tuple(self.activations))
        if len(self.widths) < 2:
            raise ConfigError("An MLP needs at least one layer (two widths)")
        if any(w <= 0 for w in self.widths):
            raise ConfigError(f"MLP widths must be positive, got {self.widths}")
        if len(self.activations) != len(self.widths) - 1:
            raise ConfigError(
                f"MLP with {len(self.widths) - 1} layers needs as many activations, got {len(self.activations)}"
            )
        unknown = [a for a in self.activations if a not in _activations]
        if unknown:
            raise ConfigError(f"Unknown activation: {unknown[0]}")

    @classmethod
    def build(cls, widths: Sequence[int], hidden_activation: str = "relu", output_activation: str = "none"):
        n_layers = len(widths) - 1
        return cls(tuple(widths), (hidden_activation,) * (n_layers - 1) + (output_activation,))

    @property
    def in_width(self) -> int:
        return self.widths[0]

    @property
    def out_width(self) -> int:
        return self.widths[-1]

    @property
    def num_layers(self) -> int:
        return len(self.widths) - 1


class Mlp:
    def __init__(self, spec: MlpSpec, prefix: str = "mlp"):
        self.spec = spec
        self.prefix = prefix

    def weight_key(self, layer: int) -> str:
        return f"{self.prefix}.{layer}.weight"

    def bias_key(self, layer: int) -> str:
        return f"{self.prefix}.{layer}.bias"

    def initialize(self, store: ParamStore, rng: np.random.Generator, zero_last: bool = False):
        """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.

        ``zero_last`` zeroes the output layer, so the network starts out
        emitting zeros.
        """
        for layer, (fan_in, fan_out) in enumerate(zip(self.spec.widths[:-1], self.spec.widths[1:])):
            bound = 1.0 / np.sqrt(fan_in)
            if zero_last and layer == self.spec.num_layers - 1:
                store.add(self.weight_key(layer), np.zeros((fan_in, fan_out)))
                store.add(self.bias_key(layer), np.zeros(fan_out))
            else:
                store.add(self.weight_key(layer), rng.uniform(-bound, bound, size=(fan_in, fan_out)))
                store.add(self.bias_key(layer), rng.uniform(-bound, bound, size=fan_out))

    def forward(self, params: ParamStore, x) -> Tensor:
        x = as_tensor(x)
        if x.ndim == 0 or x.shape[-1] != self.spec.in_width:
            raise ShapeError(f"MLP `{self.prefix}` expects input width {self.spec.in_width}, got shape {x.shape}")
        for layer, activation in enumerate(self.spec.activations):
            x = Ops.affine(x, params[self.weight_key(layer)], params[self.bias_key(layer)])
            x = _activations[activation](x)
        return x


def mlp_forward(spec: MlpSpec, params: ParamStore, x, prefix: str = "mlp") -> Tensor:
    return Mlp(spec, prefix).forward(params, x)
