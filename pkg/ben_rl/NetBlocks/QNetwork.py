import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

from ..DiffMath import Ops, ParamStore, Tensor
from ..Errors import ConfigError, ShapeError
from .Gru import GruCell, GruState
from .Mlp import Mlp, MlpSpec
from .Observation import Observation, ObservationBuilder

logger = logging.getLogger(__name__)

HISTORY_MODES = ("recurrent", "contextual")


@dataclass(frozen=True)
class QNetConfig:
    state_dim: int
    n_actions: int
    history_mode: str = "recurrent"
    hidden_dim: int = 32
    encoding_dim: int = 2
    reward_input_scale: float = 0.01
    q_scale: float = 1.0

    def __post_init__(self):
        if self.history_mode not in HISTORY_MODES:
            raise ConfigError(f"Unknown history_mode: {self.history_mode}")
        if min(self.state_dim, self.n_actions, self.hidden_dim, self.encoding_dim) <= 0:
            raise ConfigError("Q-network dimensions must be positive")
        if self.reward_input_scale <= 0.0 or self.q_scale <= 0.0:
            raise ConfigError("reward_input_scale and q_scale must be positive")

    @property
    def input_dim(self) -> int:
        return 1 + self.state_dim + self.n_actions


class RecurrentQNetwork:
    """History-conditioned Q-function.

    Recurrent mode: Linear+ReLU -> GRU -> Linear+ReLU -> Linear, producing one
    q-value per action from the recurrent encoding of the whole history.
    Contextual mode drops the recurrence and reads only the current state,
    whose raw vector then stands in as the "encoding" handed to conditioners.
    In both modes the last layer is multiplied by ``q_scale``, which puts
    q-values on the scale of the environment returns.
    """

    def __init__(self, config: QNetConfig, prefix: str = "qnet"):
        self.config = config
        self.prefix = prefix
        self.observations = ObservationBuilder(config.state_dim, config.n_actions, config.reward_input_scale)
        if config.history_mode == "recurrent":
            self.input_mlp = Mlp(MlpSpec((config.input_dim, config.hidden_dim), ("relu",)), f"{prefix}.input")
            self.gru = GruCell(config.hidden_dim, config.encoding_dim, f"{prefix}.gru")
            self.output_mlp = Mlp(
                MlpSpec.build((config.encoding_dim, config.hidden_dim, config.n_actions)), f"{prefix}.output"
            )
        else:
            self.input_mlp = None
            self.gru = None
            self.output_mlp = Mlp(
                MlpSpec.build((config.state_dim, config.hidden_dim, config.hidden_dim, config.n_actions)),
                f"{prefix}.output",
            )

    @property
    def recurrent(self) -> bool:
        return self.config.history_mode == "recurrent"

    @property
    def encoding_dim(self) -> int:
        return self.config.encoding_dim if self.recurrent else self.config.state_dim

    @property
    def n_actions(self) -> int:
        return self.config.n_actions

    def initialize(self, store: ParamStore, rng: np.random.Generator):
        if self.recurrent:
            self.input_mlp.initialize(store, rng)
            self.gru.initialize(store, rng)
        self.output_mlp.initialize(store, rng)

    def initial_state(self) -> GruState:
        return GruState.zeros(self.encoding_dim)

    def _as_inputs(self, observation: Union[Observation, np.ndarray, Tensor]) -> Tensor:
        if isinstance(observation, Observation):
            return Tensor(self.observations.encode(observation))
        inputs = observation if isinstance(observation, Tensor) else Tensor(observation)
        if inputs.shape[-1] != self.config.input_dim:
            raise ShapeError(f"Q-network expects inputs of width {self.config.input_dim}, got shape {inputs.shape}")
        return inputs

    def _q_values(self, params: ParamStore, features: Tensor) -> Tensor:
        q_values = self.output_mlp.forward(params, features)
        return q_values if self.config.q_scale == 1.0 else Ops.mul(q_values, self.config.q_scale)

    def step(self, params: ParamStore, state: GruState, observation) -> Tuple[GruState, Tensor]:
        """Consume one observation (or a batch of rows) and return (encoding, q-values)."""
        inputs = self._as_inputs(observation)
        if self.recurrent:
            features = self.input_mlp.forward(params, inputs)
            state = self.gru.step(params, state, features)
            return state, self._q_values(params, state.hidden)

        index = (Ellipsis, slice(1, 1 + self.config.state_dim))
        current = Ops.take(inputs, index)
        return GruState(Ops.stop_gradient(current)), self._q_values(params, current)

    def unroll(
        self, params: ParamStore, observations: Sequence[Observation], state: GruState = None
    ) -> List[Tuple[GruState, Tensor]]:
        state = self.initial_state() if state is None else state
        outputs = []
        for observation in observations:
            state, q_values = self.step(params, state, observation)
            outputs.append((state, q_values))
        return outputs


def qnet_step(qnet: RecurrentQNetwork, params: ParamStore, state: GruState, observation) -> Tuple[GruState, Tensor]:
    return qnet.step(params, state, observation)
