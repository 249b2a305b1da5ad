from .ActNorm import ActNorm
from .AutoregressiveLayers import InverseAutoregressiveLayer, MaskedAutoregressiveLayer
from .FlowLayer import FlowLayer, positive_scale, raw_for_scale, standard_normal_log_prob
from .FlowStack import FlowStack, flow_forward, flow_inverse, log_prob
from .LULinear import LULinear
from .Made import Made, autoregressive_masks
from .Permutation import Permutation
from .Surjections import Abs, Slice
