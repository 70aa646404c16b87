import logging
import re
from datetime import datetime, timezone

ROOT_LOGGER = "airmax"


def slugify(name: str, max_len: int = 40) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")
    return slug[:max_len].rstrip("-")


def make_run_id(name: str = "") -> str:
    """UTC timestamp down to microseconds, then the slugged name if any.

    Runs recorded within the same second still get distinct ids.
    """
    ts = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
    slug = slugify(name)
    return f"{ts}_{slug}" if slug else ts


def get_sim_logger(module_name: str) -> logging.Logger:
    """Child of the ``airmax`` logger, e.g. ``airmax.protocols``.

    Handlers live on the parent only and are installed by
    ``harness.main.setup_logger``.
    """
    return logging.getLogger(f"{ROOT_LOGGER}.{module_name}")
