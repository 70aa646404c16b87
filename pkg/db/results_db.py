"""DuckDB ledger of simulation runs and TDMA comparison records.

Connection strategy:
  All connections are short-lived (open → execute → close), so concurrent
  batch workers never hold the DuckDB write lock between operations.
  A retry with backoff absorbs collisions when two writes overlap.
"""

from __future__ import annotations

import time
from pathlib import Path
from typing import Iterable, Optional

import duckdb
import pandas as pd

from utils import get_sim_logger

logger = get_sim_logger("db")

_SCHEMA_VERSION = 1


def _default_db_path() -> Path:
    from env_loader import results_db_path
    return results_db_path()


class ResultsDB:

    def __init__(self, db_path=None):
        self.db_path = Path(db_path) if db_path is not None else _default_db_path()
        self.db_path.parent.mkdir(parents=True, exist_ok=True)
        self._run_schema()

    # ── connection management ────────────────────────────────────────────

    def _connect(self, retries: int = 5, base_delay: float = 0.2):
        """Open a short-lived DuckDB connection with retry + exponential backoff."""
        last_err = None
        for attempt in range(retries):
            try:
                return duckdb.connect(str(self.db_path))
            except Exception as e:
                last_err = e
                if attempt < retries - 1:
                    wait = base_delay * (2 ** attempt)
                    logger.debug("DuckDB connect retry %d/%d in %.1fs: %s",
                                 attempt + 1, retries, wait, e)
                    time.sleep(wait)
        raise last_err

    def _query(self, sql: str, params: list = None) -> pd.DataFrame:
        con = self._connect()
        try:
            return con.execute(sql, params).df() if params else con.execute(sql).df()
        finally:
            con.close()

    def _exec(self, sql: str, params: list = None) -> None:
        con = self._connect()
        try:
            con.execute(sql, params) if params else con.execute(sql)
        finally:
            con.close()

    def _executemany(self, sql: str, rows: list) -> None:
        if not rows:
            return
        con = self._connect()
        try:
            con.executemany(sql, rows)
        finally:
            con.close()

    # ── schema ──────────────────────────────────────────────────────────

    def _run_schema(self) -> None:
        """Create tables in a single connection; every statement is idempotent."""
        con = self._connect()
        try:
            for stmt in [
                """CREATE TABLE IF NOT EXISTS runs (
                    run_id VARCHAR PRIMARY KEY, recorded_at TIMESTAMP NOT NULL,
                    scenario VARCHAR, protocol VARCHAR NOT NULL, n INTEGER NOT NULL,
                    converged BOOLEAN NOT NULL, iterations INTEGER NOT NULL,
                    slots INTEGER NOT NULL, x_star DOUBLE NOT NULL,
                    topology_fingerprint VARCHAR)""",
                """CREATE TABLE IF NOT EXISTS comparisons (
                    run_id VARCHAR NOT NULL, n INTEGER NOT NULL, trial INTEGER NOT NULL,
                    k_t_slots INTEGER NOT NULL, k_b_slots INTEGER NOT NULL,
                    ratio DOUBLE NOT NULL,
                    PRIMARY KEY (run_id, n, trial))""",
                """CREATE TABLE IF NOT EXISTS schema_info (version INTEGER)""",
            ]:
                con.execute(stmt)
            if con.execute("SELECT COUNT(*) FROM schema_info").fetchone()[0] == 0:
                con.execute("INSERT INTO schema_info VALUES (?)", [_SCHEMA_VERSION])
        finally:
            con.close()

    # ── writes ──────────────────────────────────────────────────────────

    def record_run(self, run_id: str, scenario_name: Optional[str], result) -> None:
        self._exec(
            "INSERT INTO runs (run_id,recorded_at,scenario,protocol,n,converged,iterations,"
            "slots,x_star,topology_fingerprint) VALUES (?,NOW(),?,?,?,?,?,?,?,?)"
            " ON CONFLICT (run_id) DO UPDATE SET recorded_at=excluded.recorded_at,"
            " scenario=excluded.scenario, protocol=excluded.protocol, n=excluded.n,"
            " converged=excluded.converged, iterations=excluded.iterations,"
            " slots=excluded.slots, x_star=excluded.x_star,"
            " topology_fingerprint=excluded.topology_fingerprint",
            [run_id, scenario_name, result.protocol, result.n, result.converged,
             result.iterations, result.slots, result.x_star, result.fingerprint])

    def record_comparison(self, run_id: str, records: Iterable) -> int:
        rows = [[run_id, r.n, r.trial, r.k_t_slots, r.k_b_slots, r.ratio] for r in records]
        self._executemany(
            "INSERT INTO comparisons (run_id,n,trial,k_t_slots,k_b_slots,ratio)"
            " VALUES (?,?,?,?,?,?) ON CONFLICT (run_id,n,trial) DO UPDATE SET"
            " k_t_slots=excluded.k_t_slots, k_b_slots=excluded.k_b_slots,"
            " ratio=excluded.ratio",
            rows)
        return len(rows)

    # ── reads ───────────────────────────────────────────────────────────

    def runs(self, limit: int = 50) -> pd.DataFrame:
        return self._query(
            "SELECT run_id, recorded_at, scenario, protocol, n, converged, iterations,"
            " slots, x_star, topology_fingerprint FROM runs"
            " ORDER BY recorded_at DESC, run_id LIMIT ?", [limit])

    def comparisons(self, run_id: str) -> pd.DataFrame:
        return self._query(
            "SELECT n, trial, k_t_slots, k_b_slots, ratio FROM comparisons"
            " WHERE run_id = ? ORDER BY n, trial", [run_id])
