from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..DiffMath import Ops, ParamStore, Tensor
from ..Errors import ShapeError
from ..NetBlocks import GruState, Observation, ObservationBuilder, RecurrentQNetwork
from .BellmanTargets import EvaluationPoint


@dataclass(frozen=True, eq=False)
class TrajectoryWindow:
    """Observations o_start..o_stop with the transitions between them."""

    start: int
    observations: List[Observation]
    actions: List[int]
    rewards: List[float]

    def __len__(self):
        return len(self.actions)


@dataclass(frozen=True, eq=False)
class BootstrapSample:
    b: float
    q: float
    encoding: np.ndarray
    step: int
    action: int


class TrajectoryBuffer:
    """The history h_t = (s_0, a_0, r_0, ..., s_t) of the running episode."""

    def __init__(self, builder: ObservationBuilder, initial_state: np.ndarray):
        self.builder = builder
        self.states: List[np.ndarray] = [np.asarray(initial_state, dtype=np.float64)]
        self.observations: List[Observation] = [builder.initial(initial_state)]
        self.actions: List[int] = []
        self.rewards: List[float] = []

    def __len__(self):
        return len(self.actions)

    def append(self, action: int, reward: float, next_state: np.ndarray):
        next_state = np.asarray(next_state, dtype=np.float64)
        self.observations.append(self.builder.build(reward, next_state, action))
        self.states.append(next_state)
        self.actions.append(int(action))
        self.rewards.append(float(reward))

    def window(self, length: Optional[int] = None, stop: Optional[int] = None) -> TrajectoryWindow:
        """The last ``length`` transitions before observation ``stop`` (default: now)."""
        stop = len(self) if stop is None else int(stop)
        if not 0 <= stop <= len(self):
            raise ShapeError(f"window stop {stop} outside a history of {len(self)} transitions")
        start = 0 if length is None else max(0, stop - int(length))
        return TrajectoryWindow(
            start,
            self.observations[start:stop + 1],
            self.actions[start:stop],
            self.rewards[start:stop],
        )


def unroll(
    qnet: RecurrentQNetwork, params: ParamStore, window: TrajectoryWindow, state: GruState = None
) -> List[EvaluationPoint]:
    """Run the Q-network from ``state`` (default h_init) over every observation of ``window``."""
    points = []
    for observation, (encoding, q_values) in zip(window.observations, qnet.unroll(params, window.observations, state)):
        points.append(EvaluationPoint(encoding, q_values, observation.state))
    return points


def bootstrap(
    qnet: RecurrentQNetwork, params: ParamStore, gamma: float, window: TrajectoryWindow
) -> List[BootstrapSample]:
    """b_i = r_i + gamma * max_a Q(h_{i+1}, a) paired with q_i = Q(h_i, a_i) at the current params."""
    if len(window) == 0:
        raise ShapeError("bootstrapping needs a window with at least two states")
    points = unroll(qnet, params, window)
    samples = []
    for i, (action, reward) in enumerate(zip(window.actions, window.rewards)):
        q_values = points[i].q_values.values
        next_best = float(np.max(points[i + 1].q_values.values))
        samples.append(
            BootstrapSample(
                b=reward + gamma * next_best,
                q=float(q_values[action]),
                encoding=points[i].encoding.hidden.numpy(),
                step=window.start + i,
                action=action,
            )
        )
    return samples


def stack_samples(samples: List[BootstrapSample]) -> Tuple[Tensor, Tensor, Tensor]:
    """(b, q, encodings) as constant tensors, one row per sample."""
    b = Tensor(np.array([s.b for s in samples]))
    q = Tensor(np.array([s.q for s in samples]))
    encodings = Ops.constant(np.stack([s.encoding for s in samples]))
    return b, q, encodings
