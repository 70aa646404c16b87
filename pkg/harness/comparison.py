"""Slot cost of the superposition protocol against TDMA max-consensus.

For every (n, trial) one random strongly connected topology and one random x0
are drawn, and both the standard protocol (n slots per iteration) and the
FTC protocol (2 slots per iteration) run on that same pair. The record keeps
r = k_t / k_b; r > 1 means superposition finished in fewer slots.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional

import streams
from config import comparison_defaults
from consensus.protocols import run
from harness.scenario import random_scenario
from radio.channel import ChannelModel
from utils import get_sim_logger

logger = get_sim_logger("comparison")

N_LIMITS = (3, 100)


@dataclass(frozen=True)
class ComparisonRecord:
    n: int
    trial: int
    k_t_slots: int
    k_b_slots: int
    ratio: float


def trial_seed(base_seed: int, n: int, trial: int) -> int:
    return streams.derive_seed(base_seed, streams.TRIAL, n, trial)


def run_trial(
    n: int,
    trial: int,
    channel: ChannelModel,
    base_seed: int,
    density: float = comparison_defaults["density"],
    max_iters: int = comparison_defaults["max_iters"],
) -> ComparisonRecord:
    seed = trial_seed(base_seed, n, trial)
    standard_cfg = random_scenario(n, seed, "standard", density=density, channel=channel, max_iters=max_iters)
    ftc_cfg = standard_cfg.with_protocol("ftc")

    standard = run(standard_cfg, record_trace=False)
    ftc = run(ftc_cfg, record_trace=False)
    if standard.fingerprint != ftc.fingerprint:
        raise RuntimeError(f"n={n} trial={trial}: protocols ran on different topologies")
    if not (standard.converged and ftc.converged):
        logger.warning("n=%d trial=%d: standard converged=%s, ftc converged=%s",
                       n, trial, standard.converged, ftc.converged)

    k_b = ftc.slots
    ratio = standard.slots / k_b if k_b else float("inf")
    return ComparisonRecord(n, trial, standard.slots, k_b, ratio)


def compare_tdma(
    n_values: Iterable[int],
    trials_per_n: int,
    channel: ChannelModel,
    base_seed: int,
    *,
    density: float = comparison_defaults["density"],
    workers: Optional[int] = None,
    max_iters: int = comparison_defaults["max_iters"],
) -> list[ComparisonRecord]:
    """One record per (n, trial), ordered by n then trial.

    Each trial owns the seed derived from (base_seed, n, trial), so the records
    do not depend on ``workers``.
    """
    n_values = sorted(set(int(n) for n in n_values))
    if not n_values:
        raise ValueError("at least one agent count is required")
    lo, hi = N_LIMITS
    if n_values[0] < lo or n_values[-1] > hi:
        raise ValueError(f"agent counts must lie in [{lo}, {hi}], got {n_values[0]}..{n_values[-1]}")
    if trials_per_n < 1:
        raise ValueError(f"trials_per_n must be >= 1, got {trials_per_n}")
    workers = workers or comparison_defaults["workers"]

    jobs = [(n, t) for n in n_values for t in range(trials_per_n)]
    logger.info("TDMA comparison: %d agent counts × %d trials on %d workers",
                len(n_values), trials_per_n, workers)

    def _job(job):
        n, t = job
        return run_trial(n, t, channel, base_seed, density, max_iters)

    with ThreadPoolExecutor(max_workers=workers) as executor:
        records = list(executor.map(_job, jobs))

    logger.info("TDMA comparison finished: %d records", len(records))
    return records
