from dataclasses import dataclass
from typing import Optional

from ..Environments.PriorDataset import PriorKnowledge
from ..Errors import ConfigError

MODES = ("episodic_tabula_rasa", "episodic_weak_prior", "zero_shot_strong_prior")
POSTERIOR_KINDS = ("variational_flow", "exact_tiger")
SCHEDULES = ("interleaved", "batch")
EPISTEMIC_LAYOUTS = ("maf", "affine")


@dataclass(frozen=True)
class TrainConfig:
    """Hyper-parameters of pretraining and of the online posterior/Q updates.

    ``n_update`` is the number of MSBBE steps taken per observation. Each of
    them is preceded by ELBO steps: one per transition of the truncated
    window under the ``interleaved`` schedule, ``n_posterior`` full-window
    steps under the ``batch`` schedule.
    Every MSBBE step averages over ``msbbe_batch`` sub-histories whose end
    is drawn uniformly from the history seen so far.
    """

    mode: str = "episodic_tabula_rasa"
    posterior: str = "variational_flow"
    schedule: str = "interleaved"
    n_pretrain: int = 200
    n_update: int = 1
    n_posterior: int = 4
    lr_omega: float = 1e-4
    lr_psi: float = 1e-4
    truncation: int = 64
    n_mc: int = 1
    msbbe_batch: int = 1
    max_steps: Optional[int] = None
    n_episodes: int = 1
    prior_variance: float = 0.1
    epistemic_layout: str = "maf"
    clip_norm: float = 10.0
    n_demonstrations: int = 4

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"Unknown training mode: {self.mode}")
        if self.posterior not in POSTERIOR_KINDS:
            raise ConfigError(f"Unknown posterior kind: {self.posterior}")
        if self.schedule not in SCHEDULES:
            raise ConfigError(f"Unknown schedule: {self.schedule}")
        if self.epistemic_layout not in EPISTEMIC_LAYOUTS:
            raise ConfigError(f"Unknown epistemic layout: {self.epistemic_layout}")
        if self.n_posterior < 1:
            raise ConfigError("n_posterior must be at least 1 so that psi moves faster than omega")
        if min(self.n_pretrain, self.n_update, self.n_demonstrations) < 0:
            raise ConfigError("step counts must be non-negative")
        if min(self.n_mc, self.msbbe_batch, self.truncation, self.n_episodes) < 1:
            raise ConfigError("n_mc, msbbe_batch, truncation and n_episodes must be positive")
        if self.lr_omega <= 0.0 or self.lr_psi <= 0.0 or self.prior_variance <= 0.0:
            raise ConfigError("learning rates and the prior variance must be positive")
        if self.max_steps is not None and self.max_steps < 1:
            raise ConfigError("max_steps must be positive")

    @property
    def episodic(self) -> bool:
        return self.mode.startswith("episodic")

    def prior_knowledge(self) -> PriorKnowledge:
        if self.mode == "episodic_tabula_rasa":
            return PriorKnowledge.empty()
        if self.mode == "episodic_weak_prior":
            return PriorKnowledge()
        return PriorKnowledge(n_demonstrations=self.n_demonstrations)
