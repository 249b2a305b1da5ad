from typing import Optional, Sequence

import numpy as np

from ..DiffMath import Ops, ParamStore, Tensor
from .FlowLayer import FlowLayer, positive_scale, raw_for_scale


class LULinear(FlowLayer):
    """x = z W^T + b with W = P L U.

    L is unit lower-triangular, U upper-triangular with a positive diagonal
    and P a fixed permutation matrix, so log|det W| = sum(log diag U).
    """

    kind = "lu_linear"

    def __init__(self, dim: int, prefix: str = "", permutation: Optional[Sequence[int]] = None, identity_init: bool = True):
        super().__init__(dim, prefix)
        order = np.arange(dim) if permutation is None else np.asarray(permutation, dtype=int)
        self.permutation_matrix = np.eye(dim)[order]
        self.identity_init = identity_init
        self._lower_mask = np.tril(np.ones((dim, dim)), k=-1)
        self._upper_mask = np.triu(np.ones((dim, dim)), k=1)

    def initialize(self, store: ParamStore, rng: np.random.Generator):
        d = self.dim
        if self.identity_init:
            store.add(self.key("lower"), np.zeros((d, d)))
            store.add(self.key("upper"), np.zeros((d, d)))
            store.add(self.key("diag_raw"), np.zeros(d))
            store.add(self.key("bias"), np.zeros(d))
        else:
            bound = 1.0 / np.sqrt(d)
            store.add(self.key("lower"), rng.uniform(-bound, bound, (d, d)))
            store.add(self.key("upper"), rng.uniform(-bound, bound, (d, d)))
            store.add(self.key("diag_raw"), rng.uniform(-0.5, 0.5, d))
            store.add(self.key("bias"), rng.uniform(-bound, bound, d))

    def set_diagonal(self, store: ParamStore, scales):
        store.set(self.key("diag_raw"), raw_for_scale(np.broadcast_to(scales, (self.dim,))))

    def diagonal(self, params: ParamStore) -> Tensor:
        return positive_scale(params[self.key("diag_raw")])

    def weight(self, params: ParamStore) -> Tensor:
        eye = np.eye(self.dim)
        lower = Ops.add(Ops.mul(params[self.key("lower")], Tensor(self._lower_mask)), Tensor(eye))
        diagonal = Ops.mul(Tensor(eye), Ops.reshape(self.diagonal(params), (1, self.dim)))
        upper = Ops.add(Ops.mul(params[self.key("upper")], Tensor(self._upper_mask)), diagonal)
        return Ops.matmul(Ops.matmul(Tensor(self.permutation_matrix), lower), upper)

    def log_abs_det(self, params: ParamStore) -> Tensor:
        return Ops.sum(Ops.log(self.diagonal(params)))

    def forward(self, params, z, context=None):
        z = self._check_input(z, self.dim, "forward")
        x = Ops.add(Ops.matmul(z, Ops.transpose(self.weight(params))), params[self.key("bias")])
        return x, Ops.broadcast_to(self.log_abs_det(params), (z.shape[0],))

    def inverse(self, params, x, context=None, rng=None):
        x = self._check_input(x, self.dim, "inverse")
        inverse_weight = Ops.matrix_inverse(self.weight(params))
        z = Ops.matmul(Ops.sub(x, params[self.key("bias")]), Ops.transpose(inverse_weight))
        return z, Ops.broadcast_to(Ops.neg(self.log_abs_det(params)), (x.shape[0],))
