import sys
from pathlib import Path

import numpy as np
import pytest

# flat layout: top-level modules (config, streams, ...) import by name
ROOT = Path(__file__).resolve().parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from network.graph import from_arcs  # noqa: E402
from radio.airlink import SignalRanges  # noqa: E402

FOUR_AGENT_ARCS = [(1, 0), (2, 0), (0, 1), (0, 2), (3, 2), (2, 3), (1, 3)]


@pytest.fixture
def ranges():
    return SignalRanges(0.0, 10.0, 1.0, 5.0)


@pytest.fixture
def four_agents():
    return from_arcs(4, FOUR_AGENT_ARCS)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(autouse=True)
def _no_seed_override(monkeypatch):
    monkeypatch.delenv("AIRMAX_SEED", raising=False)
    monkeypatch.delenv("AIRMAX_WORKERS", raising=False)
