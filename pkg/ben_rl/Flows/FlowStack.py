import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..DiffMath import Ops, ParamStore, Tensor
from ..DiffMath.Tensor import as_tensor
from ..Errors import ShapeError
from .ActNorm import ActNorm
from .FlowLayer import FlowLayer, standard_normal_log_prob

logger = logging.getLogger(__name__)


class FlowStack:
    """A composition f_L o ... o f_1 over a standard Gaussian base of ``base_dim``.

    All tensors are batch-first: ``z`` is (n, base_dim) and ``x`` is
    (n, out_dim). Log-determinants are returned per row.
    """

    def __init__(self, layers: Sequence[FlowLayer], base_dim: int):
        self.layers: List[FlowLayer] = list(layers)
        self.base_dim = int(base_dim)
        width = self.base_dim
        for layer in self.layers:
            if layer.in_dim != width:
                raise ShapeError(f"{layer.kind} `{layer.prefix}` expects width {layer.in_dim}, previous layer gives {width}")
            width = layer.out_dim
        self.out_dim = width

    @property
    def stochastic(self) -> bool:
        return any(layer.surjective for layer in self.layers)

    def initialize(self, store: ParamStore, rng: np.random.Generator):
        for layer in self.layers:
            layer.initialize(store, rng)

    def _check(self, value, width: int) -> Tensor:
        value = as_tensor(value)
        if value.ndim != 2 or value.shape[1] != width:
            raise ShapeError(f"flow expects shape (n, {width}), got {value.shape}")
        return value

    def forward(self, params: ParamStore, z, context=None) -> Tuple[Tensor, Tensor]:
        x = self._check(z, self.base_dim)
        logdet = Tensor(np.zeros(x.shape[0]))
        for layer in self.layers:
            x, layer_logdet = layer.forward(params, x, context)
            logdet = Ops.add(logdet, layer_logdet)
        return x, logdet

    def inverse(
        self, params: ParamStore, x, context=None, rng: Optional[np.random.Generator] = None
    ) -> Tuple[Tensor, Tensor]:
        z = self._check(x, self.out_dim)
        logdet = Tensor(np.zeros(z.shape[0]))
        for layer in reversed(self.layers):
            z, layer_logdet = layer.inverse(params, z, context, rng)
            logdet = Ops.add(logdet, layer_logdet)
        return z, logdet

    def log_prob(self, params: ParamStore, x, context=None, rng: Optional[np.random.Generator] = None) -> Tensor:
        z, logdet = self.inverse(params, x, context, rng)
        return Ops.add(standard_normal_log_prob(z), logdet)

    def sample(
        self, params: ParamStore, n: int, rng: np.random.Generator, context=None
    ) -> Tuple[Tensor, Tensor]:
        return self.forward(params, Tensor(rng.standard_normal((n, self.base_dim))), context)

    def data_initialize(
        self, store: ParamStore, x: np.ndarray, context=None, rng: Optional[np.random.Generator] = None
    ):
        """Walk ``x`` back through the stack, fitting every ActNorm to what reaches it."""
        h = Tensor(np.asarray(x, dtype=np.float64))
        for layer in reversed(self.layers):
            if isinstance(layer, ActNorm):
                layer.initialize_from_data(store, h.values)
                logger.debug("data-initialized %s from %d rows", layer.prefix, h.shape[0])
            h, _ = layer.inverse(store, h, context, rng)


def flow_forward(stack: FlowStack, params: ParamStore, z, context=None) -> Tuple[Tensor, Tensor]:
    return stack.forward(params, z, context)


def flow_inverse(stack: FlowStack, params: ParamStore, x, context=None, rng=None) -> Tuple[Tensor, Tensor]:
    return stack.inverse(params, x, context, rng)


def log_prob(stack: FlowStack, params: ParamStore, x, context=None, rng=None) -> Tensor:
    return stack.log_prob(params, x, context, rng)
