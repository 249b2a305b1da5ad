from .Main import build_parser, main
from .MetricsWriter import metrics_path, write_json, write_metrics
from .Presets import ABLATION_AXES, PRESETS, ablation_variants, get_preset
from .RunConfig import RunConfig, deep_merge, load_config_file, resolve_run_config
