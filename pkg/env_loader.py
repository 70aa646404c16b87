"""Environment loader: selects and loads the appropriate .env.* file.

Environments
------------
dev   → .env.dev    local development (default)
test  → .env.test   CI reruns
prod  → .env.prod   long batch campaigns

Selection priority (highest to lowest)
---------------------------------------
1. Explicit ``env_name`` argument passed to :func:`load_env`
2. ``APP_ENV`` shell variable (useful for cron / CI)
3. Hard default: ``"dev"``

Variables read after loading
----------------------------
AIRMAX_SEED     overrides the seed of every scenario when set
AIRMAX_WORKERS  overrides the worker count of the TDMA comparison

Isolation
---------
Each environment owns its own results ledger:
  data/results_dev.duckdb  /  data/results_test.duckdb  /  data/results_prod.duckdb

Typical usage
-------------
    import env_loader
    active_env = env_loader.load_env(args.env)
    seed = env_loader.seed_override() or cfg_seed
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

from config import data_dir

ROOT = Path(__file__).resolve().parent

ENVIRONMENTS: tuple[str, ...] = ("dev", "test", "prod")
DEFAULT_ENV: str = "dev"

SEED_VAR = "AIRMAX_SEED"
WORKERS_VAR = "AIRMAX_WORKERS"


def get_active_env() -> str:
    """Return the name of the currently active environment."""
    from_var = os.environ.get("APP_ENV", "").strip().lower()
    if from_var in ENVIRONMENTS:
        return from_var
    return DEFAULT_ENV


def load_env(env_name: str | None = None, *, override: bool = False) -> str:
    """Load ``.env.{env_name}`` into the process environment.

    Falls back to ``.env`` if the env-specific file does not exist.
    Returns the resolved environment name and pins it in ``APP_ENV`` so that
    later calls to :func:`get_active_env` agree.
    """
    if env_name is None or env_name not in ENVIRONMENTS:
        env_name = get_active_env()

    os.environ["APP_ENV"] = env_name

    env_file = ROOT / f".env.{env_name}"
    if env_file.exists():
        load_dotenv(env_file, override=override)
    else:
        fallback = ROOT / ".env"
        if fallback.exists():
            load_dotenv(fallback, override=override)

    return env_name


def _int_var(name: str) -> Optional[int]:
    raw = os.environ.get(name, "").strip()
    if not raw:
        return None
    try:
        return int(raw, 0)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from None


def seed_override() -> Optional[int]:
    """Return the seed forced through ``AIRMAX_SEED``, or None when unset."""
    seed = _int_var(SEED_VAR)
    if seed is not None and not 0 <= seed < 2**64:
        raise ValueError(f"{SEED_VAR} must fit in 64 unsigned bits, got {seed}")
    return seed


def workers_override() -> Optional[int]:
    workers = _int_var(WORKERS_VAR)
    if workers is not None and workers < 1:
        raise ValueError(f"{WORKERS_VAR} must be >= 1, got {workers}")
    return workers


def results_db_path(env_name: str | None = None) -> Path:
    """Return the DuckDB file path for the given (or active) environment."""
    env = env_name or get_active_env()
    return Path(data_dir) / f"results_{env}.duckdb"
