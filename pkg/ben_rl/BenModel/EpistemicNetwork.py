from typing import Sequence, Tuple

import numpy as np

from ..DiffMath import ParamStore, Tensor
from ..Errors import ConfigError
from ..FlowLayerFactory import build_flow_stack_from_config
from .PriorSpec import PriorSpec

LAYOUTS = ("maf", "affine")


class EpistemicNetwork:
    """Variational flow phi = t_psi(z_ep) over the aleatoric parameters.

    ``maf`` layout: actnorm, two masked autoregressive sub-blocks, LU-linear,
    permutation and an output actnorm. ``affine`` keeps only LU-linear and
    the output actnorm, i.e. a full-covariance Gaussian. The output actnorm
    starts at the prior's mean and scale, every other layer at the identity,
    so a freshly initialized network samples exactly from the prior.
    """

    def __init__(self, phi_dim: int, layout: str = "maf", made_hidden: Sequence[int] = (16,), prefix: str = "epistemic"):
        if layout not in LAYOUTS:
            raise ConfigError(f"Unknown epistemic layout: {layout}")
        self.phi_dim = phi_dim
        self.layout = layout
        self.prefix = prefix
        hidden = list(made_hidden)
        if layout == "maf":
            layers = [
                {"name": "actnorm", "args": {"dim": phi_dim, "prefix": f"{prefix}.actnorm_in"}},
                {"name": "masked_autoregressive_affine", "args": {"dim": phi_dim, "prefix": f"{prefix}.maf0", "hidden": hidden}},
                {"name": "masked_autoregressive_affine", "args": {"dim": phi_dim, "prefix": f"{prefix}.maf1", "hidden": hidden}},
                {"name": "lu_linear", "args": {"dim": phi_dim, "prefix": f"{prefix}.lu"}},
                {"name": "permutation", "args": {"dim": phi_dim, "prefix": f"{prefix}.permutation"}},
            ]
        else:
            layers = [{"name": "lu_linear", "args": {"dim": phi_dim, "prefix": f"{prefix}.lu"}}]
        layers.append({"name": "actnorm", "args": {"dim": phi_dim, "prefix": f"{prefix}.actnorm_out"}})
        self.stack = build_flow_stack_from_config(phi_dim, layers)

    @property
    def output_actnorm(self):
        return self.stack.layers[-1]

    def initialize(self, store: ParamStore, rng: np.random.Generator, prior: PriorSpec):
        if prior.dim != self.phi_dim:
            raise ConfigError(f"prior has dim {prior.dim}, epistemic network {self.phi_dim}")
        self.stack.initialize(store, rng)
        self.output_actnorm.set_affine(store, prior.mean, prior.std)

    def sample(self, params: ParamStore, z_ep) -> Tuple[Tensor, Tensor]:
        """phi = t_psi(z_ep) together with log|det d phi / d z_ep| per row."""
        return self.stack.forward(params, z_ep)

    def log_prob(self, params: ParamStore, phi) -> Tensor:
        return self.stack.log_prob(params, phi)


def epistemic_sample(network: EpistemicNetwork, params: ParamStore, z_ep) -> Tuple[Tensor, Tensor]:
    return network.sample(params, z_ep)
