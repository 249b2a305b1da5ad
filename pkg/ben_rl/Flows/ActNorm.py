import numpy as np

from ..DiffMath import Ops, ParamStore
from .FlowLayer import FlowLayer


class ActNorm(FlowLayer):
    """Per-dimension affine map x = z * exp(log_scale) + shift, identity at init."""

    kind = "actnorm"

    def initialize(self, store: ParamStore, rng: np.random.Generator):
        store.add(self.key("shift"), np.zeros(self.dim))
        store.add(self.key("log_scale"), np.zeros(self.dim))

    def set_affine(self, store: ParamStore, shift, scale):
        store.set(self.key("shift"), np.broadcast_to(np.asarray(shift, dtype=np.float64), (self.dim,)))
        store.set(self.key("log_scale"), np.log(np.broadcast_to(np.asarray(scale, dtype=np.float64), (self.dim,))))

    def initialize_from_data(self, store: ParamStore, x: np.ndarray):
        """Choose shift/scale so that the inverse maps ``x`` to zero mean, unit variance."""
        x = np.asarray(x, dtype=np.float64).reshape(-1, self.dim)
        std = x.std(axis=0) if x.shape[0] > 1 else np.ones(self.dim)
        self.set_affine(store, x.mean(axis=0), np.where(std > 1e-6, std, 1.0))

    def _logdet(self, params: ParamStore, n: int):
        return Ops.broadcast_to(Ops.sum(params[self.key("log_scale")]), (n,))

    def forward(self, params, z, context=None):
        z = self._check_input(z, self.dim, "forward")
        x = Ops.add(Ops.mul(z, Ops.exp(params[self.key("log_scale")])), params[self.key("shift")])
        return x, self._logdet(params, z.shape[0])

    def inverse(self, params, x, context=None, rng=None):
        x = self._check_input(x, self.dim, "inverse")
        z = Ops.mul(Ops.sub(x, params[self.key("shift")]), Ops.exp(Ops.neg(params[self.key("log_scale")])))
        return z, Ops.neg(self._logdet(params, x.shape[0]))
