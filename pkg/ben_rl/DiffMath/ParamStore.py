from typing import Dict, Iterator, Tuple

import numpy as np

from ..Errors import ConfigError, ShapeError
from .Tensor import Tensor


class ParamStore:
    """Named parameters with their gradients and adaptive-moment optimizer state.

    Parameters are leaf tensors with ``requires_grad=True``; a tape backward
    pass accumulates into their ``.grad`` and ``grads`` exposes those arrays by
    name. The moments live next to the parameters so that two stores can be
    optimized independently on different timescales.
    """

    def __init__(self, name: str = "params"):
        self.name = name
        self._params: Dict[str, Tensor] = {}
        self.first_moment: Dict[str, np.ndarray] = {}
        self.second_moment: Dict[str, np.ndarray] = {}
        self.step_count = 0

    def add(self, key: str, values) -> Tensor:
        if key in self._params:
            raise ConfigError(f"Parameter `{key}` already exists in store `{self.name}`")
        param = Tensor(values, requires_grad=True, name=key)
        self._params[key] = param
        self.first_moment[key] = np.zeros_like(param.values)
        self.second_moment[key] = np.zeros_like(param.values)
        return param

    def set(self, key: str, values):
        """Overwrite a parameter in place, keeping the tensor identity."""
        param = self._params[key]
        values = np.asarray(values, dtype=np.float64)
        if values.shape != param.shape:
            raise ShapeError(f"Parameter `{key}` has shape {param.shape}, got {values.shape}")
        param.values[...] = values

    def __getitem__(self, key: str) -> Tensor:
        try:
            return self._params[key]
        except KeyError:
            raise KeyError(f"No parameter `{key}` in store `{self.name}`") from None

    def __contains__(self, key: str) -> bool:
        return key in self._params

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def __len__(self) -> int:
        return len(self._params)

    def items(self) -> Iterator[Tuple[str, Tensor]]:
        return iter(self._params.items())

    @property
    def num_parameters(self) -> int:
        return int(sum(p.size for p in self._params.values()))

    @property
    def grads(self) -> Dict[str, np.ndarray]:
        return {
            key: (p.grad if p.grad is not None else np.zeros_like(p.values))
            for key, p in self._params.items()
        }

    def zero_grad(self):
        for param in self._params.values():
            param.zero_grad()

    def global_grad_norm(self) -> float:
        return float(np.sqrt(sum(float(np.sum(g * g)) for g in self.grads.values())))

    def param_norms(self) -> Dict[str, float]:
        return {key: float(np.linalg.norm(p.values)) for key, p in self._params.items()}

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {key: p.values.copy() for key, p in self._params.items()}

    def load_state_dict(self, state: Dict[str, np.ndarray], reset_optimizer: bool = True):
        missing = set(self._params) - set(state)
        if missing:
            raise ConfigError(f"State for store `{self.name}` is missing {sorted(missing)}")
        for key, values in state.items():
            self.set(key, values)
        self.zero_grad()
        if reset_optimizer:
            for key in self._params:
                self.first_moment[key][...] = 0.0
                self.second_moment[key][...] = 0.0
            self.step_count = 0
