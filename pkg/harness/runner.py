"""Run single scenarios and directories of scenarios."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import pandas as pd

from consensus.protocols import RunResult, run
from harness.reporting import write_trace_csv
from harness.scenario import ScenarioConfig, load_scenario
from utils import get_sim_logger

logger = get_sim_logger("runner")

BATCH_COLUMNS = ["name", "protocol", "n", "converged", "iterations", "slots", "x_star"]


def run_scenario(cfg: ScenarioConfig, record_trace: bool = True) -> RunResult:
    logger.info("Running scenario '%s' (%s, n=%d, seed=%d)", cfg.name, cfg.protocol, cfg.n, cfg.seed)
    return run(cfg, record_trace=record_trace)


def run_batch(
    directory,
    workers: int = 1,
    trace_dir: Optional[Path] = None,
) -> pd.DataFrame:
    """Run every ``*.json`` scenario in ``directory``; one summary row per file.

    Files are sorted by name and every run is seeded by its own scenario, so
    the summary is the same for any ``workers``. When ``trace_dir`` is given,
    each trace is written there as ``<name>.csv``.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise NotADirectoryError(f"{directory} is not a directory")
    paths = sorted(directory.glob("*.json"))
    if not paths:
        logger.warning("No scenario files found in %s", directory)
        return pd.DataFrame(columns=BATCH_COLUMNS)

    # validate everything up front so a bad file fails before any run
    configs = [load_scenario(p) for p in paths]

    def _one(cfg: ScenarioConfig) -> dict:
        result = run_scenario(cfg, record_trace=trace_dir is not None)
        if trace_dir is not None:
            write_trace_csv(result, Path(trace_dir) / f"{cfg.name}.csv")
        return {
            "name": cfg.name,
            "protocol": result.protocol,
            "n": result.n,
            "converged": result.converged,
            "iterations": result.iterations,
            "slots": result.slots,
            "x_star": result.x_star,
        }

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        rows = list(executor.map(_one, configs))
    return pd.DataFrame(rows, columns=BATCH_COLUMNS)
