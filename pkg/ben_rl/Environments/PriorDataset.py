"""Prior knowledge for search-and-rescue, expressed as Bellman training data.

Three kinds of items are produced:

* movement transitions inside the grid, which are deterministic and pay 0;
* door transitions from the boundary, which pay the prior-expected door
  reward and leave the agent where it is;
* demonstrations of a privileged agent in MDPs drawn from the prior, which
  listens, walks to each victim's door in turn and listens again after every
  rescue. They keep the context and a snapshot per step so that training can
  draw fresh next transitions from the simulator.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np

from .SearchRescueEnvironment import (
    DOWN,
    LEFT,
    LISTEN,
    MOVES,
    RIGHT,
    UP,
    SearchRescueConfig,
    SearchRescueContext,
    SearchRescueDynamics,
    SearchRescueState,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PriorTransition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray


@dataclass(frozen=True, eq=False)
class Demonstration:
    context: SearchRescueContext
    observations: List[np.ndarray]
    actions: List[int]
    rewards: List[float]
    snapshots: List[SearchRescueState]

    def __len__(self):
        return len(self.actions)


@dataclass(frozen=True)
class PriorKnowledge:
    include_movement: bool = True
    include_boundary: bool = True
    n_demonstrations: int = 0
    demonstration_steps: Optional[int] = None

    @classmethod
    def empty(cls) -> "PriorKnowledge":
        return cls(include_movement=False, include_boundary=False, n_demonstrations=0)


@dataclass
class PriorDataset:
    movement: List[PriorTransition] = field(default_factory=list)
    boundary: List[PriorTransition] = field(default_factory=list)
    demonstrations: List[Demonstration] = field(default_factory=list)
    r_prior: float = 0.0

    def __len__(self):
        return len(self.movement) + len(self.boundary) + len(self.demonstrations)

    @property
    def is_empty(self) -> bool:
        return len(self) == 0

    def sample(self, rng: np.random.Generator) -> Union[PriorTransition, Demonstration]:
        """Pick a non-empty kind uniformly, then an item of that kind uniformly."""
        kinds = [items for items in (self.movement, self.boundary, self.demonstrations) if items]
        if not kinds:
            raise IndexError("cannot sample from an empty prior dataset")
        items = kinds[rng.integers(len(kinds))]
        return items[rng.integers(len(items))]


def _observation(config: SearchRescueConfig, cell) -> np.ndarray:
    state = np.zeros(config.state_dim)
    state[:2] = cell
    return state


def _grid_cells(config: SearchRescueConfig):
    k = config.half_width
    for x in range(-k, k + 1):
        for y in range(-k, k + 1):
            yield (x, y)


def movement_transitions(config: SearchRescueConfig) -> List[PriorTransition]:
    transitions = []
    for cell in _grid_cells(config):
        for action, (dx, dy) in MOVES.items():
            target = (cell[0] + dx, cell[1] + dy)
            if config.in_grid(target):
                transitions.append(
                    PriorTransition(_observation(config, cell), action, 0.0, _observation(config, target))
                )
    return transitions


def boundary_transitions(config: SearchRescueConfig) -> List[PriorTransition]:
    transitions = []
    r_prior = config.prior_door_reward
    for cell in _grid_cells(config):
        for action, (dx, dy) in MOVES.items():
            if not config.in_grid((cell[0] + dx, cell[1] + dy)):
                here = _observation(config, cell)
                transitions.append(PriorTransition(here, action, r_prior, here.copy()))
    return transitions


def _door_approach(config: SearchRescueConfig, door):
    """Boundary cell next to ``door`` and the action that opens it from there."""
    k = config.half_width
    cell = (int(np.clip(door[0], -k, k)), int(np.clip(door[1], -k, k)))
    if door[1] > k:
        return cell, UP
    if door[1] < -k:
        return cell, DOWN
    if door[0] > k:
        return cell, RIGHT
    return cell, LEFT


def _walk(location, target) -> List[int]:
    actions = []
    dx, dy = target[0] - location[0], target[1] - location[1]
    actions += [RIGHT if dx > 0 else LEFT] * abs(dx)
    actions += [UP if dy > 0 else DOWN] * abs(dy)
    return actions


def demonstrate(
    config: SearchRescueConfig,
    context: SearchRescueContext,
    rng: np.random.Generator,
    max_steps: Optional[int] = None,
) -> Demonstration:
    dynamics = SearchRescueDynamics(config)
    max_steps = config.max_steps if max_steps is None else max_steps
    state = dynamics.initial_state()
    observations, actions, rewards, snapshots = [dynamics.observe(state)], [], [], []

    def act(action):
        nonlocal state
        outcome = dynamics.step(state, action, context, rng)
        snapshots.append(state)
        actions.append(action)
        rewards.append(outcome.reward)
        observations.append(outcome.observation)
        state = outcome.state

    plan = [LISTEN]
    while len(actions) < max_steps:
        if not plan:
            remaining = [i for i, done in enumerate(state.rescued) if not done]
            if not remaining:
                break
            approaches = [_door_approach(config, context.victim_doors[i]) for i in remaining]
            distances = [abs(c[0] - state.location[0]) + abs(c[1] - state.location[1]) for c, _ in approaches]
            cell, exit_action = approaches[int(np.argmin(distances))]
            plan = _walk(state.location, cell) + [exit_action, LISTEN]
        act(plan.pop(0))

    return Demonstration(context, observations, actions, rewards, snapshots)


def build_prior_dataset(
    config: SearchRescueConfig,
    knowledge: PriorKnowledge = PriorKnowledge(),
    rng: Optional[np.random.Generator] = None,
) -> PriorDataset:
    rng = np.random.default_rng() if rng is None else rng
    dataset = PriorDataset(r_prior=config.prior_door_reward)
    if knowledge.include_movement:
        dataset.movement = movement_transitions(config)
    if knowledge.include_boundary:
        dataset.boundary = boundary_transitions(config)
    for _ in range(knowledge.n_demonstrations):
        context = SearchRescueContext.sample(config, rng)
        dataset.demonstrations.append(demonstrate(config, context, rng, knowledge.demonstration_steps))
    logger.info(
        "prior dataset: %d movement, %d boundary, %d demonstrations (r_prior=%.4f)",
        len(dataset.movement),
        len(dataset.boundary),
        len(dataset.demonstrations),
        dataset.r_prior,
    )
    return dataset
