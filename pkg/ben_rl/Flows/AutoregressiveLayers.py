from typing import Optional, Sequence, Tuple

import numpy as np

from ..DiffMath import Ops, ParamStore, Tensor
from .FlowLayer import FlowLayer, positive_scale
from .Made import Made


class _AutoregressiveAffine(FlowLayer):
    def __init__(
        self,
        dim: int,
        prefix: str = "",
        context_dim: int = 0,
        context_slice: Optional[Tuple[int, int]] = None,
        hidden: Sequence[int] = (16,),
        activation: str = "tanh",
        identity_init: bool = True,
    ):
        super().__init__(dim, prefix, context_dim, context_slice)
        self.identity_init = identity_init
        self.made = Made(dim, hidden, self.context_dim, self.key("made"), activation)

    def initialize(self, store: ParamStore, rng: np.random.Generator):
        self.made.initialize(store, rng, zero_output=self.identity_init)

    def _parallel(self, params, source, context):
        """shift and scale computed from a fully known conditioning input."""
        shift, raw_scale = self.made.forward(params, source, context)
        return shift, positive_scale(raw_scale)

    def _sequential(self, params, given, context, solve):
        """Build the autoregressive side column by column.

        ``solve(given_i, shift_i, scale_i)`` returns column i of the side that
        conditions the MADE. Returns (columns, sum of log scales).
        """
        n = given.shape[0]
        columns, logdet = [], None
        for i in range(self.dim):
            known = columns + [Tensor(np.zeros((n, self.dim - i)))]
            partial = Ops.concatenate(known, axis=1)
            shift, scale = self._parallel(params, partial, context)
            column = (slice(None), slice(i, i + 1))
            scale_i = Ops.take(scale, column)
            columns.append(solve(Ops.take(given, column), Ops.take(shift, column), scale_i))
            log_scale_i = Ops.reshape(Ops.log(scale_i), (n,))
            logdet = log_scale_i if logdet is None else Ops.add(logdet, log_scale_i)
        return Ops.concatenate(columns, axis=1), logdet


def _affine(z_i, shift_i, scale_i):
    return Ops.add(Ops.mul(z_i, scale_i), shift_i)


def _unaffine(x_i, shift_i, scale_i):
    return Ops.div(Ops.sub(x_i, shift_i), scale_i)


class MaskedAutoregressiveLayer(_AutoregressiveAffine):
    """x_i = z_i * scale_i(x_<i) + shift_i(x_<i).

    Density evaluation (``inverse``) is one parallel pass; sampling
    (``forward``) needs one pass per dimension.
    """

    kind = "masked_autoregressive_affine"

    def forward(self, params, z, context=None):
        z = self._check_input(z, self.dim, "forward")
        context = self._context(context, z.shape[0])
        return self._sequential(params, z, context, _affine)

    def inverse(self, params, x, context=None, rng=None):
        x = self._check_input(x, self.dim, "inverse")
        context = self._context(context, x.shape[0])
        shift, scale = self._parallel(params, x, context)
        z = _unaffine(x, shift, scale)
        return z, Ops.neg(Ops.sum(Ops.log(scale), axis=1))


class InverseAutoregressiveLayer(_AutoregressiveAffine):
    """x_i = z_i * scale_i(z_<i) + shift_i(z_<i).

    Sampling (``forward``) is one parallel pass; the inverse is sequential.
    """

    kind = "inverse_autoregressive_affine"

    def forward(self, params, z, context=None):
        z = self._check_input(z, self.dim, "forward")
        context = self._context(context, z.shape[0])
        shift, scale = self._parallel(params, z, context)
        return _affine(z, shift, scale), Ops.sum(Ops.log(scale), axis=1)

    def inverse(self, params, x, context=None, rng=None):
        x = self._check_input(x, self.dim, "inverse")
        context = self._context(context, x.shape[0])
        z, logdet = self._sequential(params, x, context, _unaffine)
        return z, Ops.neg(logdet)
