import csv
import json
import logging
import os
from typing import Iterable

from ..Trainer import METRICS_FIELDS, MetricsRow

logger = logging.getLogger(__name__)


def write_json(path: str, document: dict):
    with open(path, "w") as out_file:
        json.dump(document, out_file, indent=2, sort_keys=True)
        out_file.write("\n")


def write_metrics(path: str, rows: Iterable[MetricsRow]) -> int:
    """One CSV row per timestep under the fixed metrics header."""
    count = 0
    with open(path, "w", newline="") as out_file:
        writer = csv.DictWriter(out_file, fieldnames=METRICS_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({name: getattr(row, name) for name in METRICS_FIELDS})
            count += 1
    logger.info("wrote %d metrics rows to %s", count, path)
    return count


def metrics_path(run_dir: str, label: str) -> str:
    return os.path.join(run_dir, f"metrics_{label}.csv")
