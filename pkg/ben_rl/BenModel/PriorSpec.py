from dataclasses import dataclass

import numpy as np

from ..DiffMath import Ops, Tensor
from ..Errors import ConfigError
from ..Flows.FlowLayer import LOG_2PI


@dataclass(frozen=True, eq=False)
class PriorSpec:
    """Diagonal Gaussian prior over the aleatoric parameters phi."""

    mean: np.ndarray
    variance: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        variance = np.broadcast_to(np.asarray(self.variance, dtype=np.float64), mean.shape).copy()
        if np.any(variance <= 0.0):
            raise ConfigError("prior variances must be positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "variance", variance)

    @classmethod
    def isotropic(cls, dim: int, variance: float = 0.1, mean: float = 0.0) -> "PriorSpec":
        return cls(np.full(dim, mean, dtype=np.float64), np.full(dim, variance, dtype=np.float64))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.variance)

    def log_prob(self, phi: Tensor) -> Tensor:
        """Row-wise log density of phi with shape (n, dim)."""
        centred = Ops.sub(phi, self.mean)
        quadratic = Ops.sum(Ops.div(Ops.square(centred), self.variance), axis=-1)
        normaliser = 0.5 * float(np.sum(np.log(self.variance))) + 0.5 * self.dim * LOG_2PI
        return Ops.sub(Ops.mul(quadratic, -0.5), normaliser)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.mean + self.std * rng.standard_normal((n, self.dim))
