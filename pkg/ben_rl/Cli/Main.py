"""``ben-rl`` command line: run experiments, print tiger oracles, sweep ablations.

Exit codes: 0 on success, 1 for configuration errors, 2 for any other
ben_rl error (metrics collected before the failure are still written).
"""
import argparse
import csv
import dataclasses
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from ..Environments import TigerConfig, TigerEnvironment
from ..Errors import BenError, ConfigError
from ..Oracles import (
    BayesOptimalPolicy,
    BeliefGrid,
    TigerAnalytic,
    belief_value_iteration,
    listen_policy,
    qbrl_policy,
    tiger_rollouts,
)
from ..Trainer import MetricsRow, run_seed
from .MetricsWriter import metrics_path, write_json, write_metrics
from .Presets import ABLATION_AXES, PRESETS, ablation_variants
from .RunConfig import (
    DEFAULT_OUTPUT_DIR,
    OUTPUT_ENV_VAR,
    RunConfig,
    _check_keys,
    load_config_file,
    resolve_run_config,
)

logger = logging.getLogger(__name__)

# values printed for the default tiger parameters in the literature, kept for reference only
REPORTED_TIGER_VALUES = {"q_wrong": -155.0, "J_QBRL": -27.5}


@dataclass
class JobResult:
    label: str
    seed: int
    rows: List[MetricsRow] = field(default_factory=list)
    error: Optional[str] = None
    exit_code: int = 0


def _run_job(job) -> JobResult:
    label, config, seed = job
    try:
        env = config.build_environment()
        metrics = run_seed(env, config.train, seed, config.qnet, config.aleatoric)
        return JobResult(label, seed, metrics.rows)
    except ConfigError as exc:
        return JobResult(label, seed, error=str(exc), exit_code=1)
    except BenError as exc:
        partial = getattr(exc, "metrics", None)
        rows = partial.rows if partial is not None else []
        diagnostics = getattr(exc, "diagnostics", {})
        return JobResult(label, seed, rows, error=f"{exc} {diagnostics}".strip(), exit_code=2)


def _execute(config: RunConfig, variants, received: dict, workers: int) -> int:
    resolved = [(label, config.with_overrides(overrides)) for label, overrides in variants]
    documents = {label: variant.to_document() for label, variant in resolved}

    os.makedirs(config.run_dir, exist_ok=True)
    write_json(os.path.join(config.run_dir, "config_as_received.json"), received)
    summary = config.to_document()
    summary["variants"] = documents
    write_json(os.path.join(config.run_dir, "resolved_config.json"), summary)

    jobs = [(label, variant, seed) for label, variant in resolved for seed in variant.seeds]
    logger.info("running %d jobs for %s with %d worker(s)", len(jobs), config.name, workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(job) for job in jobs]

    exit_code = 0
    for label, _ in resolved:
        rows = [row for result in results if result.label == label for row in result.rows]
        write_metrics(metrics_path(config.run_dir, label), rows)
    for result in results:
        if result.error:
            logger.error("%s seed %d failed: %s", result.label, result.seed, result.error)
            exit_code = max(exit_code, result.exit_code)
    return exit_code


def _received(args, document: dict) -> dict:
    flags = {key: value for key, value in vars(args).items() if key not in ("handler", "log_level")}
    return {"file": document, "flags": flags}


def cmd_run(args) -> int:
    document = load_config_file(args.config)
    config = resolve_run_config(document, args.preset, args.seed, args.out)
    variants = config.variants or (("default", {}),)
    return _execute(config, variants, _received(args, document), args.workers)


def cmd_ablate(args) -> int:
    document = load_config_file(args.config)
    config = resolve_run_config(document, args.preset, args.seed, args.out)
    config = dataclasses.replace(config, name=f"{config.name}_ablate_{args.axis}")
    variants = ablation_variants(args.axis, config.pretrain_grid)
    return _execute(config, variants, _received(args, document), args.workers)


def _format_value(value) -> str:
    return "" if value is None else f"{value:.6f}"


def cmd_oracle(args) -> int:
    document = load_config_file(args.config)
    environment = _check_keys("environment", document.get("environment"), ("name", "args"))
    if environment.get("name", "tiger") != "tiger":
        raise ConfigError("oracles are only available for the tiger environment")
    tiger = TigerEnvironment._parse_env_kwargs(dict(environment.get("args") or {}))

    analytic = TigerAnalytic.from_config(tiger)
    q_correct, q_wrong = analytic.contextual_q_values()
    grid = belief_value_iteration(BeliefGrid(args.resolution, tiger), args.tol)
    reported = REPORTED_TIGER_VALUES if tiger == TigerConfig() else {}

    table = [
        ("q_correct", q_correct, None, "analytic"),
        ("q_wrong", q_wrong, None, "analytic"),
        ("J_QBRL", analytic.qbrl_value(0.5), None, "analytic"),
        ("J_listen", analytic.listen_value(), None, "analytic"),
        ("V(0.5)", float(grid.value(0.5)), None, "belief value iteration"),
    ]
    if args.rollouts > 0:
        rng = np.random.default_rng(args.seed)
        for name, policy in (
            ("J_QBRL", qbrl_policy),
            ("J_listen", listen_policy),
            ("J_bayes_optimal", BayesOptimalPolicy(grid)),
        ):
            estimate = tiger_rollouts(policy, args.rollouts, rng, tiger)
            table.append((name, estimate.mean, estimate.stderr, f"rollouts (n={args.rollouts})"))

    out_dir = os.path.join(args.out or os.environ.get(OUTPUT_ENV_VAR) or DEFAULT_OUTPUT_DIR, "oracle")
    os.makedirs(out_dir, exist_ok=True)
    write_json(os.path.join(out_dir, "config_as_received.json"), _received(args, document))
    write_json(
        os.path.join(out_dir, "resolved_config.json"),
        {"environment": {"name": "tiger", "args": dataclasses.asdict(tiger)}, "resolution": args.resolution, "tol": args.tol},
    )

    header = ("quantity", "value", "stderr", "method", "reported")
    lines = [f"{header[0]:<16} {header[1]:>14} {header[2]:>10}  {header[3]:<24} {header[4]}"]
    with open(os.path.join(out_dir, "oracle.csv"), "w", newline="") as out_file:
        writer = csv.writer(out_file, lineterminator="\n")
        writer.writerow(header)
        for name, value, stderr, method in table:
            printed = reported.get(name) if method == "analytic" else None
            writer.writerow((name, repr(float(value)), _format_value(stderr), method, _format_value(printed)))
            lines.append(
                f"{name:<16} {value:>14.6f} {_format_value(stderr):>10}  {method:<24} {_format_value(printed)}"
            )
    print("\n".join(lines))
    return 0


def _run_flags(parser: argparse.ArgumentParser):
    parser.add_argument("config", nargs="?", default=None, help="JSON run config")
    parser.add_argument("--preset", choices=sorted(PRESETS), default=None, metavar="NAME", help="experiment preset")
    parser.add_argument("--seed", type=int, default=None, help="run this single seed")
    parser.add_argument("--out", default=None, help=f"output directory (default: ${OUTPUT_ENV_VAR} or ./{DEFAULT_OUTPUT_DIR})")
    parser.add_argument("--workers", type=int, default=1, help="worker processes for independent seeds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ben-rl", description=__doc__.splitlines()[0])
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="train BEN agents and write per-step metrics")
    _run_flags(run)
    run.set_defaults(handler=cmd_run)

    ablate = commands.add_parser("ablate", help="sweep one axis with everything else fixed")
    _run_flags(ablate)
    ablate.add_argument("--axis", required=True, choices=ABLATION_AXES)
    ablate.set_defaults(handler=cmd_ablate)

    oracle = commands.add_parser("oracle", help="print exact tiger values")
    oracle.add_argument("config", nargs="?", default=None, help="JSON config with a tiger environment section")
    oracle.add_argument("--out", default=None)
    oracle.add_argument("--resolution", type=int, default=2001)
    oracle.add_argument("--tol", type=float, default=1e-8)
    oracle.add_argument("--rollouts", type=int, default=0, help="also estimate policy returns from this many episodes")
    oracle.add_argument("--seed", type=int, default=0)
    oracle.set_defaults(handler=cmd_oracle)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    logging.basicConfig(level=args.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return 1
    except BenError as exc:
        logger.error("run failed: %s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
