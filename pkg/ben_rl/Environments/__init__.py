from .CmdpEnvironment import CmdpEnvironment
from .PriorDataset import (
    Demonstration,
    PriorDataset,
    PriorKnowledge,
    PriorTransition,
    build_prior_dataset,
    demonstrate,
)
from .SearchRescueEnvironment import (
    SearchRescueConfig,
    SearchRescueContext,
    SearchRescueDynamics,
    SearchRescueEnvironment,
    SearchRescueState,
)
from .TigerBelief import TigerBelief, tiger_belief_update
from .TigerEnvironment import TigerConfig, TigerDynamics, TigerEnvironment
