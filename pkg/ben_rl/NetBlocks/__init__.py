from .Gru import GruCell, GruState, gru_step
from .Mlp import Mlp, MlpSpec, mlp_forward
from .Observation import Observation, ObservationBuilder
from .QNetwork import QNetConfig, RecurrentQNetwork, qnet_step
