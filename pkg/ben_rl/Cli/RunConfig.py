import copy
import dataclasses
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

from ..BenModel import AleatoricConfig
from ..EnvironmentFactory import build_environment_from_config
from ..Errors import ConfigError
from ..NetBlocks import QNetConfig
from ..Trainer import TrainConfig
from .Presets import DEFAULT_PRETRAIN_GRID, get_preset

logger = logging.getLogger(__name__)

OUTPUT_ENV_VAR = "BEN_OUT_DIR"
DEFAULT_OUTPUT_DIR = "runs"

_section_keys = {
    "experiment": ("name", "preset", "pretrain_grid"),
    "environment": ("name", "args"),
    "model": ("qnet", "aleatoric"),
    "output": ("dir",),
}
_sections = tuple(_section_keys) + ("train", "seeds")
_qnet_keys = tuple(f.name for f in dataclasses.fields(QNetConfig) if f.name not in ("state_dim", "n_actions"))
_aleatoric_keys = tuple(f.name for f in dataclasses.fields(AleatoricConfig))
_train_keys = tuple(f.name for f in dataclasses.fields(TrainConfig))


def deep_merge(base: Mapping, override: Mapping) -> dict:
    """Recursively merge ``override`` into a copy of ``base``; non-dict values replace."""
    merged = copy.deepcopy(dict(base))
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _check_keys(section: str, values: Any, allowed) -> dict:
    if values is None:
        return {}
    if not isinstance(values, Mapping):
        raise ConfigError(f"Config section `{section}` must be a mapping, got {type(values).__name__}")
    for key in values:
        if key not in allowed:
            raise ConfigError(f"Unknown config key for section `{section}`: {key}")
    return dict(values)


def load_config_file(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r") as config_file:
            document = json.load(config_file)
    except OSError as exc:
        raise ConfigError(f"Cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ConfigError(f"Config file {path} must hold a JSON object")
    return document


@dataclass(frozen=True)
class RunConfig:
    name: str
    preset: Optional[str]
    environment: Dict[str, Any]
    qnet: Dict[str, Any]
    aleatoric: AleatoricConfig
    train: TrainConfig
    output_dir: str
    seeds: Tuple[int, ...]
    pretrain_grid: Tuple[int, ...] = DEFAULT_PRETRAIN_GRID
    variants: Tuple[Tuple[str, dict], ...] = ()
    document: Dict[str, Any] = field(default_factory=dict, repr=False)

    @property
    def run_dir(self) -> str:
        return os.path.join(self.output_dir, self.name)

    def build_environment(self):
        return build_environment_from_config(copy.deepcopy(self.environment))

    def with_overrides(self, overrides: Mapping) -> "RunConfig":
        return _resolve(deep_merge(self.document, overrides), self.preset, self.output_dir, self.variants)

    def to_document(self) -> dict:
        """Every setting with its defaults filled in, environment parameters included."""
        env = self.build_environment()
        return {
            "experiment": {"name": self.name, "preset": self.preset, "pretrain_grid": list(self.pretrain_grid)},
            "environment": {"name": self.environment["name"], "args": dataclasses.asdict(env.config)},
            "model": {
                "qnet": {key: getattr(QNetConfig(1, 1, **self.qnet), key) for key in _qnet_keys},
                "aleatoric": dataclasses.asdict(self.aleatoric),
            },
            "train": dataclasses.asdict(self.train),
            "output": {"dir": self.output_dir},
            "seeds": list(self.seeds),
            "variants": [label for label, _ in self.variants],
        }


def _resolve(document: dict, preset: Optional[str], output_dir: str, variants) -> RunConfig:
    experiment = _check_keys("experiment", document.get("experiment"), _section_keys["experiment"])
    environment = _check_keys("environment", document.get("environment"), _section_keys["environment"])
    model = _check_keys("model", document.get("model"), _section_keys["model"])
    qnet = _check_keys("model.qnet", model.get("qnet"), _qnet_keys)
    aleatoric = _check_keys("model.aleatoric", model.get("aleatoric"), _aleatoric_keys)
    train = _check_keys("train", document.get("train"), _train_keys)

    if "name" not in environment:
        raise ConfigError("Config section `environment` needs a `name`")
    seeds = document.get("seeds", [0])
    if isinstance(seeds, int) or not seeds or not all(isinstance(s, int) for s in seeds):
        raise ConfigError(f"`seeds` must be a non-empty list of integers, got {seeds!r}")

    try:
        QNetConfig(1, 1, **qnet)
        aleatoric_config = AleatoricConfig(**aleatoric)
        train_config = TrainConfig(**train)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc

    return RunConfig(
        name=str(experiment.get("name") or preset or "custom"),
        preset=preset,
        environment={"name": environment["name"], "args": dict(environment.get("args") or {})},
        qnet=qnet,
        aleatoric=aleatoric_config,
        train=train_config,
        output_dir=output_dir,
        seeds=tuple(seeds),
        pretrain_grid=tuple(experiment.get("pretrain_grid") or DEFAULT_PRETRAIN_GRID),
        variants=tuple(variants),
        document=document,
    )


def resolve_run_config(
    document: Optional[dict] = None,
    preset: Optional[str] = None,
    seed: Optional[int] = None,
    out: Optional[str] = None,
    environ: Mapping[str, str] = os.environ,
) -> RunConfig:
    """Layer CLI flags over the config file over the preset over the dataclass defaults."""
    document = _check_keys("config", document or {}, _sections)
    experiment = _check_keys("experiment", document.get("experiment"), _section_keys["experiment"])
    preset = preset or experiment.get("preset")

    variants: List[Tuple[str, dict]] = []
    if preset:
        chosen = get_preset(preset)
        document = deep_merge(chosen["config"], document)
        variants = [(label, overrides) for label, overrides in chosen["variants"]]
    if seed is not None:
        document["seeds"] = [int(seed)]

    output = _check_keys("output", document.get("output"), _section_keys["output"])
    output_dir = out or output.get("dir") or environ.get(OUTPUT_ENV_VAR) or DEFAULT_OUTPUT_DIR
    config = _resolve(document, preset, output_dir, variants)
    logger.debug("resolved run config %s", config.name)
    return config
