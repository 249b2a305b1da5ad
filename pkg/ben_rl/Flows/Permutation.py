from typing import Optional, Sequence

import numpy as np

from ..DiffMath import Ops
from ..Errors import ConfigError
from .FlowLayer import FlowLayer, zero_logdet


class Permutation(FlowLayer):
    """Fixed reordering of dimensions; reverses them unless told otherwise."""

    kind = "permutation"

    def __init__(self, dim: int, prefix: str = "", permutation: Optional[Sequence[int]] = None):
        super().__init__(dim, prefix)
        order = np.arange(dim)[::-1] if permutation is None else np.asarray(permutation, dtype=int)
        if sorted(order.tolist()) != list(range(dim)):
            raise ConfigError(f"{list(order)} is not a permutation of {dim} dimensions")
        self.order = order
        self.inverse_order = np.argsort(order)

    def forward(self, params, z, context=None):
        z = self._check_input(z, self.dim, "forward")
        return Ops.take(z, (slice(None), self.order)), zero_logdet(z.shape[0])

    def inverse(self, params, x, context=None, rng=None):
        x = self._check_input(x, self.dim, "inverse")
        return Ops.take(x, (slice(None), self.inverse_order)), zero_logdet(x.shape[0])
