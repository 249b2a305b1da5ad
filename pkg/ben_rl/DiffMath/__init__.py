from . import Ops
from .Adam import Adam, adam_step
from .ParamStore import ParamStore
from .Tensor import Tape, Tensor, as_tensor, backward
