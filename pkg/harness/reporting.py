"""CSV and JSON artifacts of runs, comparisons and the nomographic demo.

Floats are written with their shortest round-trip repr and read back with
``float_precision="round_trip"``, so parsing an emitted file gives back the
same values.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path
from typing import Iterable, Optional

import pandas as pd

from config import COMPARISON_COLUMNS, NOMOGRAPHIC_COLUMNS, TRACE_COLUMNS
from consensus.protocols import RunResult, TraceRecord
from utils import get_sim_logger

logger = get_sim_logger("reporting")

_TRACE_DTYPES = {"k": "int64", "agent": "int64", "x": "float64", "y": "bool",
                 "t_window": "int64", "u": "float64", "v_lyapunov": "float64"}
_COMPARISON_DTYPES = {"n": "int64", "trial": "int64", "k_t_slots": "int64",
                      "k_b_slots": "int64", "ratio": "float64"}


def save_csv(df: pd.DataFrame, filepath, logger_=None) -> Path:
    filepath = Path(filepath)
    filepath.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(filepath, index=False, encoding="utf-8", lineterminator="\n")
    (logger_ or logger).info("Saved %d rows to %s", len(df), filepath)
    return filepath


def _read_csv(filepath, columns: list[str], dtypes: dict) -> pd.DataFrame:
    df = pd.read_csv(filepath, float_precision="round_trip")
    if list(df.columns) != columns:
        raise ValueError(f"{filepath}: expected header {','.join(columns)}, got {','.join(df.columns)}")
    return df.astype(dtypes) if dtypes else df


# ── traces ──────────────────────────────────────────────────────────────────

def trace_frame(trace: Iterable[TraceRecord]) -> pd.DataFrame:
    rows = [asdict(r) for r in trace]
    return pd.DataFrame(rows, columns=TRACE_COLUMNS).astype(_TRACE_DTYPES)


def write_trace_csv(result: RunResult, filepath) -> Path:
    return save_csv(trace_frame(result.trace), filepath)


def read_trace_csv(filepath) -> pd.DataFrame:
    return _read_csv(filepath, TRACE_COLUMNS, _TRACE_DTYPES)


def trace_records(df: pd.DataFrame) -> list[TraceRecord]:
    return [
        TraceRecord(int(r.k), int(r.agent), float(r.x), bool(r.y), int(r.t_window),
                    float(r.u), float(r.v_lyapunov))
        for r in df.itertuples(index=False)
    ]


# ── run summaries ───────────────────────────────────────────────────────────

def summary_dict(result: RunResult, scenario_name: Optional[str] = None) -> dict:
    summary = {
        "protocol": result.protocol,
        "n": result.n,
        "converged": result.converged,
        "iterations": result.iterations,
        "slots": result.slots,
        "x_star": result.x_star,
        "final_x": result.final_x,
        "topology_fingerprint": result.fingerprint,
    }
    if scenario_name is not None:
        summary = {"scenario": scenario_name, **summary}
    return summary


def summary_json(result: RunResult, scenario_name: Optional[str] = None) -> str:
    return json.dumps(summary_dict(result, scenario_name), indent=2)


def write_summary_json(result: RunResult, filepath, scenario_name: Optional[str] = None) -> Path:
    filepath = Path(filepath)
    filepath.parent.mkdir(parents=True, exist_ok=True)
    filepath.write_text(summary_json(result, scenario_name) + "\n", encoding="utf-8")
    logger.info("Saved run summary to %s", filepath)
    return filepath


# ── TDMA comparison ─────────────────────────────────────────────────────────

def comparison_frame(records) -> pd.DataFrame:
    rows = [asdict(r) for r in records]
    return pd.DataFrame(rows, columns=COMPARISON_COLUMNS).astype(_COMPARISON_DTYPES)


def write_comparison_csv(records, filepath) -> Path:
    return save_csv(comparison_frame(records), filepath)


def read_comparison_csv(filepath) -> pd.DataFrame:
    return _read_csv(filepath, COMPARISON_COLUMNS, _COMPARISON_DTYPES)


def median_ratios(df: pd.DataFrame) -> pd.Series:
    """Median r per agent count, indexed by n."""
    return df.groupby("n")["ratio"].median().sort_index()


# ── nomographic demo ────────────────────────────────────────────────────────

def write_nomographic_csv(df: pd.DataFrame, filepath) -> Path:
    return save_csv(df[NOMOGRAPHIC_COLUMNS], filepath)


def read_nomographic_csv(filepath) -> pd.DataFrame:
    return _read_csv(filepath, NOMOGRAPHIC_COLUMNS, {"abs_error": "float64"})
