import abc
from typing import Optional, Tuple

import numpy as np

from ..DiffMath import Ops, ParamStore, Tensor
from ..DiffMath.Tensor import as_tensor
from ..Errors import ConfigError, ShapeError

SCALE_FLOOR = 1e-4
# softplus(0 + SOFTPLUS_SHIFT) == 1, so a zero raw scale is the identity
SOFTPLUS_SHIFT = float(np.log(np.e - 1.0))
LOG_2PI = float(np.log(2.0 * np.pi))


def positive_scale(raw: Tensor) -> Tensor:
    return Ops.add(Ops.mul(Ops.softplus(Ops.add(raw, SOFTPLUS_SHIFT)), 1.0 - SCALE_FLOOR), SCALE_FLOOR)


def raw_for_scale(scale) -> np.ndarray:
    """Inverse of ``positive_scale`` on plain arrays."""
    scale = np.asarray(scale, dtype=np.float64)
    if np.any(scale <= SCALE_FLOOR):
        raise ConfigError(f"Scales must exceed the floor {SCALE_FLOOR}")
    return np.log(np.expm1((scale - SCALE_FLOOR) / (1.0 - SCALE_FLOOR))) - SOFTPLUS_SHIFT


def standard_normal_log_prob(z: Tensor) -> Tensor:
    """Row-wise log N(z; 0, I) for z of shape (n, d)."""
    d = z.shape[-1]
    return Ops.sub(Ops.mul(Ops.sum(Ops.square(z), axis=-1), -0.5), 0.5 * d * LOG_2PI)


class FlowLayer(abc.ABC):
    """One transform in a flow, written in the sampling direction.

    ``forward`` maps base-side ``z`` of shape (n, in_dim) to data-side ``x`` of
    shape (n, out_dim) and returns the forward log-determinant per row.
    ``inverse`` maps back and returns the inverse-direction term, which for
    surjections is their likelihood contribution. Conditioned layers read
    columns ``context_slice`` of the context handed to the stack.
    """

    kind: str = ""
    surjective: bool = False

    def __init__(
        self,
        dim: int,
        prefix: str = "",
        context_dim: int = 0,
        context_slice: Optional[Tuple[int, int]] = None,
    ):
        if dim <= 0:
            raise ConfigError(f"{self.kind} layer needs a positive dim, got {dim}")
        self.dim = int(dim)
        self.prefix = prefix or self.kind
        self.context_slice = tuple(context_slice) if context_slice is not None else None
        if self.context_slice is not None:
            context_dim = self.context_slice[1] - self.context_slice[0]
        self.context_dim = int(context_dim)

    @property
    def in_dim(self) -> int:
        return self.dim

    @property
    def out_dim(self) -> int:
        return self.dim

    def key(self, name: str) -> str:
        return f"{self.prefix}.{name}"

    def initialize(self, store: ParamStore, rng: np.random.Generator):
        """Register this layer's parameters; parameter-free layers do nothing."""

    def _check_input(self, value: Tensor, width: int, direction: str) -> Tensor:
        value = as_tensor(value)
        if value.ndim != 2 or value.shape[1] != width:
            raise ShapeError(f"{self.kind} `{self.prefix}` {direction} expects shape (n, {width}), got {value.shape}")
        return value

    def _context(self, context, n: int) -> Optional[Tensor]:
        if self.context_dim == 0:
            return None
        if context is None:
            raise ShapeError(f"{self.kind} `{self.prefix}` is conditioned and needs a context")
        context = as_tensor(context)
        if context.ndim == 1:
            context = Ops.reshape(context, (1, context.shape[0]))
        if self.context_slice is not None:
            start, stop = self.context_slice
            if stop > context.shape[1]:
                raise ShapeError(f"context of width {context.shape[1]} has no columns {start}:{stop}")
            context = Ops.take(context, (slice(None), slice(start, stop)))
        if context.shape[1] != self.context_dim:
            raise ShapeError(f"{self.kind} `{self.prefix}` expects context width {self.context_dim}, got {context.shape[1]}")
        if context.shape[0] == n:
            return context
        if context.shape[0] != 1:
            raise ShapeError(f"context has {context.shape[0]} rows for a batch of {n}")
        return Ops.broadcast_to(context, (n, self.context_dim))

    @abc.abstractmethod
    def forward(self, params: ParamStore, z, context=None) -> Tuple[Tensor, Tensor]:
        raise NotImplementedError

    @abc.abstractmethod
    def inverse(self, params: ParamStore, x, context=None, rng: Optional[np.random.Generator] = None) -> Tuple[Tensor, Tensor]:
        raise NotImplementedError


def zero_logdet(n: int) -> Tensor:
    return Tensor(np.zeros(n))
