from .ApproxBrl import METRICS_FIELDS, MetricsRow, RunMetrics, approx_brl, run_seed
from .BenAgent import BenAgent, build_agent
from .Procedures import PretrainStats, UpdateStats, dataset_loss, posterior_updating, prior_initialisation, s0_msbbe
from .TrainConfig import MODES, POSTERIOR_KINDS, SCHEDULES, TrainConfig
