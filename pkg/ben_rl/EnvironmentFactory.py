from .Environments import SearchRescueEnvironment, TigerEnvironment
from .Errors import ConfigError

from distrib_rl.Utils.FactoryBuilder import build_component_factory

_builders = {
    "tiger": TigerEnvironment,
    "search_rescue": SearchRescueEnvironment,
}

_arg_transformers = {}

register_environment, _build_environment = build_component_factory(
    component_name="environment",
    builders=_builders,
    arg_transformers=_arg_transformers,
)


def build_environment_from_config(config):
    """Build an environment from ``"tiger"`` or ``{"name": "tiger", "args": {...}}``."""
    if isinstance(config, str):
        config = {"name": config, "args": {}}
    if not isinstance(config, dict) or "name" not in config:
        raise ConfigError(f"An environment config needs a `name`, got {config!r}")
    unknown = set(config) - {"name", "args"}
    if unknown:
        raise ConfigError(f"Unknown config key for environment: {sorted(unknown)[0]}")
    if config["name"] not in _builders:
        raise ConfigError(f"Unknown environment: {config['name']}")
    try:
        return _build_environment({"name": config["name"], "args": dict(config.get("args") or {})})
    except TypeError as exc:
        raise ConfigError(f"Bad arguments for environment `{config['name']}`: {exc}") from exc
