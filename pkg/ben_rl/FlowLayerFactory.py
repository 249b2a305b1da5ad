from .Errors import ConfigError
from .Flows import (
    Abs,
    ActNorm,
    FlowStack,
    InverseAutoregressiveLayer,
    LULinear,
    MaskedAutoregressiveLayer,
    Permutation,
    Slice,
)

from distrib_rl.Utils.FactoryBuilder import build_component_factory

_builders = {
    "actnorm": ActNorm,
    "masked_autoregressive_affine": MaskedAutoregressiveLayer,
    "inverse_autoregressive_affine": InverseAutoregressiveLayer,
    "lu_linear": LULinear,
    "permutation": Permutation,
    "slice": Slice,
    "abs": Abs,
}


def _autoregressive_args(**kwargs):
    kwargs = dict(kwargs)
    if "hidden" in kwargs:
        kwargs["hidden"] = tuple(kwargs["hidden"])
    if kwargs.get("context_slice") is not None:
        kwargs["context_slice"] = tuple(kwargs["context_slice"])
    return kwargs


_arg_transformers = {
    "masked_autoregressive_affine": _autoregressive_args,
    "inverse_autoregressive_affine": _autoregressive_args,
}


register_flow_layer, _build_flow_layer = build_component_factory(
    component_name="flow layer",
    builders=_builders,
    arg_transformers=_arg_transformers,
)


def build_flow_layer_from_config(config):
    """One layer from ``{"name": ..., "args": {...}}``, or a list of layers."""
    if isinstance(config, (list, tuple)):
        return [build_flow_layer_from_config(item) for item in config]
    if not isinstance(config, dict) or "name" not in config:
        raise ConfigError(f"A flow layer config needs a `name`, got {config!r}")
    unknown = set(config) - {"name", "args"}
    if unknown:
        raise ConfigError(f"Unknown config key for flow layer: {sorted(unknown)[0]}")
    if config["name"] not in _builders:
        raise ConfigError(f"Unknown flow layer: {config['name']}")
    try:
        return _build_flow_layer({"name": config["name"], "args": dict(config.get("args") or {})})
    except TypeError as exc:
        raise ConfigError(f"Bad arguments for flow layer `{config['name']}`: {exc}") from exc


def build_flow_stack_from_config(base_dim: int, layers) -> FlowStack:
    return FlowStack(build_flow_layer_from_config(list(layers)), base_dim)
