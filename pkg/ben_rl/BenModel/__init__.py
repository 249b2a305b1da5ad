from .BellmanModels import AffineBellmanModel, AleatoricConfig, AleatoricNetwork, BellmanModel
from .BellmanTargets import EvaluationPoint, FlowTargets, TigerTargets
from .EpistemicNetwork import EpistemicNetwork, epistemic_sample
from .History import BootstrapSample, TrajectoryBuffer, TrajectoryWindow, bootstrap, unroll
from .Losses import (
    elbo_loss,
    elbo_step_loss,
    msbbe_loss,
    predictive_bellman,
    pushforward_log_density,
    residual_product,
)
from .Posteriors import (
    ExactTigerPosterior,
    PointPosterior,
    PosteriorProvider,
    PosteriorSample,
    PriorPosterior,
    VariationalPosterior,
)
from .PriorSpec import PriorSpec
