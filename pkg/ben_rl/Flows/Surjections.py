"""Dimension-reducing and sign-forgetting layers with stochastic inverses.

Their ``inverse`` draws the information the forward pass discarded and
returns the matching likelihood contribution, so that ``FlowStack.log_prob``
remains an unbiased single-sample estimate (exact for the cases used here).
"""
import numpy as np

from ..DiffMath import Ops, Tensor
from ..Errors import ConfigError, DomainError
from .FlowLayer import FlowLayer, standard_normal_log_prob

LOG_2 = float(np.log(2.0))


def _require_rng(layer, rng):
    if rng is None:
        raise ConfigError(f"{layer.kind} `{layer.prefix}` has a stochastic inverse and needs an rng")
    return rng


class Slice(FlowLayer):
    """Keeps the first ``keep`` of ``dim`` coordinates.

    The inverse pads the dropped coordinates with N(0, 1) draws, contributing
    -log N(pad) per row.
    """

    kind = "slice"
    surjective = True

    def __init__(self, dim: int, keep: int = 1, prefix: str = ""):
        super().__init__(dim, prefix)
        if not 0 < keep < dim:
            raise ConfigError(f"slice must keep between 1 and {dim - 1} dims, got {keep}")
        self.keep = int(keep)

    @property
    def out_dim(self) -> int:
        return self.keep

    def forward(self, params, z, context=None):
        z = self._check_input(z, self.dim, "forward")
        kept = Ops.take(z, (slice(None), slice(0, self.keep)))
        dropped = Ops.take(z, (slice(None), slice(self.keep, self.dim)))
        return kept, standard_normal_log_prob(dropped)

    def inverse(self, params, x, context=None, rng=None):
        x = self._check_input(x, self.keep, "inverse")
        pad = Tensor(_require_rng(self, rng).standard_normal((x.shape[0], self.dim - self.keep)))
        return Ops.concatenate([x, pad], axis=1), Ops.neg(standard_normal_log_prob(pad))


class Abs(FlowLayer):
    """x = |z|; the inverse restores a uniformly random sign (log 2 per dim)."""

    kind = "abs"
    surjective = True

    def forward(self, params, z, context=None):
        z = self._check_input(z, self.dim, "forward")
        return Ops.abs(z), Tensor(np.full(z.shape[0], -self.dim * LOG_2))

    def inverse(self, params, x, context=None, rng=None):
        x = self._check_input(x, self.dim, "inverse")
        if np.any(x.values < 0.0):
            raise DomainError("abs layer inverse needs non-negative inputs")
        signs = _require_rng(self, rng).choice([-1.0, 1.0], size=x.shape)
        return Ops.mul(x, Tensor(signs)), Tensor(np.full(x.shape[0], self.dim * LOG_2))
