"""Conditional densities over Bellman targets b given (h, q, phi)."""
import abc
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..DiffMath import Ops, ParamStore, Tensor
from ..DiffMath.Tensor import as_tensor
from ..Errors import ConfigError, NotInvertibleError, ShapeError
from ..FlowLayerFactory import build_flow_stack_from_config
from ..Flows.FlowLayer import LOG_2PI
from ..NetBlocks import Mlp, MlpSpec


class BellmanModel(abc.ABC):
    """b = B(z_al, h, q, phi) with a tractable (or estimable) density."""

    phi_dim: int

    def initialize(self, store: ParamStore, rng: np.random.Generator):
        """Register the model's own hyper-parameters, if any."""

    @abc.abstractmethod
    def sample(self, params: ParamStore, phi: Tensor, encoding: Tensor, q: Tensor, rng: np.random.Generator) -> Tensor:
        """One target per row; phi (n, d), encoding (n, H), q (n,)."""
        raise NotImplementedError

    @abc.abstractmethod
    def negative_log_likelihood(
        self, params: ParamStore, phi: Tensor, encoding: Tensor, q: Tensor, b: Tensor, rng: np.random.Generator
    ) -> Tensor:
        """-log p(b | h, q, phi) per row, up to the constant 0.5 * log(2 pi)."""
        raise NotImplementedError


def _rows(value, n: int, width: Optional[int] = None) -> Tensor:
    value = as_tensor(value)
    if width is None:
        if value.shape != (n,):
            raise ShapeError(f"expected shape ({n},), got {value.shape}")
        return value
    if value.ndim == 1:
        value = Ops.reshape(value, (1, value.shape[0]))
    if value.shape[1] != width:
        raise ShapeError(f"expected width {width}, got shape {value.shape}")
    if value.shape[0] != n:
        value = Ops.broadcast_to(value, (n, width))
    return value


class AffineBellmanModel(BellmanModel):
    """Linear-Gaussian targets b = phi_0 + phi_1 * q + sigma * z.

    With sigma == 0 the targets are deterministic; the density then does not
    exist and asking for it raises ``NotInvertibleError``.
    """

    phi_dim = 2

    def __init__(self, sigma: float = 1.0):
        if sigma < 0.0:
            raise ConfigError("sigma must be non-negative")
        self.sigma = float(sigma)

    def mean(self, phi: Tensor, q: Tensor) -> Tensor:
        n = q.shape[0]
        phi = _rows(phi, n, 2)
        return Ops.add(
            Ops.reshape(Ops.take(phi, (slice(None), slice(0, 1))), (n,)),
            Ops.mul(Ops.reshape(Ops.take(phi, (slice(None), slice(1, 2))), (n,)), q),
        )

    def sample(self, params, phi, encoding, q, rng):
        q = as_tensor(q)
        mean = self.mean(phi, q)
        if self.sigma == 0.0:
            return mean
        return Ops.add(mean, Tensor(self.sigma * rng.standard_normal(q.shape[0])))

    def negative_log_likelihood(self, params, phi, encoding, q, b, rng):
        if self.sigma == 0.0:
            raise NotInvertibleError("deterministic affine Bellman model has no density")
        q = as_tensor(q)
        residual = Ops.div(Ops.sub(b, self.mean(phi, q)), self.sigma)
        return Ops.add(Ops.mul(Ops.square(residual), 0.5), float(np.log(self.sigma)))


@dataclass(frozen=True)
class AleatoricConfig:
    n_layers: int = 2
    # conditioner outputs handed to each flow block
    context_width: int = 4
    made_hidden: Tuple[int, ...] = (8,)
    use_abs: bool = True
    output_scale: float = 10.0
    q_input_scale: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "made_hidden", tuple(self.made_hidden))
        if self.n_layers < 1 or self.context_width < 1:
            raise ConfigError("the aleatoric flow needs at least one layer and a positive context width")
        if self.output_scale <= 0.0:
            raise ConfigError("output_scale must be positive")

    @property
    def n_blocks(self) -> int:
        return self.n_layers + (1 if self.use_abs else 0)

    @property
    def phi_dim(self) -> int:
        return self.n_blocks * self.context_width


class AleatoricNetwork(BellmanModel):
    """Flow density over Bellman targets, conditioned on (phi, h, q).

    A shared conditioner maps (phi, encoding, q) to ``phi_dim`` outputs; block
    l of the flow reads outputs [l * k, (l + 1) * k). The flow runs on a 2-D
    base: ``n_layers`` blocks of [inverse autoregressive, LU-linear,
    permutation], then a slice down to one dimension, an abs layer and a
    conditioned 1-D affine block. ``use_abs=False`` ends the flow at the slice.
    Targets are expressed around the current q-value:
    b = q + output_scale * x.
    """

    def __init__(self, config: AleatoricConfig, encoding_dim: int, prefix: str = "aleatoric"):
        self.config = config
        self.encoding_dim = encoding_dim
        self.prefix = prefix
        self.phi_dim = config.phi_dim
        d = config.phi_dim
        self.conditioner = Mlp(MlpSpec.build((d + encoding_dim + 1, d, d)), f"{prefix}.conditioner")

        k = config.context_width
        hidden = list(config.made_hidden)
        layers = []
        for block in range(config.n_layers):
            layers += [
                {"name": "inverse_autoregressive_affine", "args": {
                    "dim": 2, "prefix": f"{prefix}.iaf{block}", "context_slice": [block * k, (block + 1) * k],
                    "hidden": hidden, "identity_init": False,
                }},
                {"name": "lu_linear", "args": {"dim": 2, "prefix": f"{prefix}.lu{block}"}},
                {"name": "permutation", "args": {"dim": 2, "prefix": f"{prefix}.permutation{block}"}},
            ]
        layers.append({"name": "slice", "args": {"dim": 2, "keep": 1, "prefix": f"{prefix}.slice"}})
        if config.use_abs:
            block = config.n_layers
            layers += [
                {"name": "abs", "args": {"dim": 1, "prefix": f"{prefix}.abs"}},
                {"name": "inverse_autoregressive_affine", "args": {
                    "dim": 1, "prefix": f"{prefix}.output", "context_slice": [block * k, (block + 1) * k],
                    "hidden": hidden, "identity_init": False,
                }},
            ]
        self.stack = build_flow_stack_from_config(2, layers)

    def initialize(self, store, rng):
        self.conditioner.initialize(store, rng)
        self.stack.initialize(store, rng)

    def context(self, params: ParamStore, phi, encoding, q) -> Tensor:
        q = as_tensor(q)
        n = q.shape[0]
        inputs = Ops.concatenate(
            [
                _rows(phi, n, self.phi_dim),
                _rows(encoding, n, self.encoding_dim),
                Ops.reshape(Ops.mul(q, self.config.q_input_scale), (n, 1)),
            ],
            axis=1,
        )
        return self.conditioner.forward(params, inputs)

    def sample(self, params, phi, encoding, q, rng):
        q = as_tensor(q)
        n = q.shape[0]
        context = self.context(params, phi, encoding, q)
        x, _ = self.stack.sample(params, n, rng, context)
        return Ops.add(q, Ops.mul(Ops.reshape(x, (n,)), self.config.output_scale))

    def negative_log_likelihood(self, params, phi, encoding, q, b, rng):
        q = as_tensor(q)
        n = q.shape[0]
        context = self.context(params, phi, encoding, q)
        x = Ops.reshape(Ops.div(Ops.sub(b, q), self.config.output_scale), (n, 1))
        log_prob = self.stack.log_prob(params, x, context, rng)
        return Ops.sub(Ops.neg(log_prob), 0.5 * LOG_2PI - float(np.log(self.config.output_scale)))
