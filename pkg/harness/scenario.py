"""Scenario files: schema, validation and resolution of random parts.

A scenario is a JSON object, version 1:

    {
      "version": 1,
      "name": "ring-ftc",
      "topology": {"n": 4, "arcs": [[0, 1], [1, 2], [2, 3], [3, 0]]},
      "x0": [3.0, 4.0, 3.0, 3.0],
      "channel": {"kind": "rayleigh", "scale": 1.0},
      "protocol": "ftc",
      "link": "airlink",
      "ranges": {"s": [0, 10], "p": [1, 5]},
      "rel_tol": 1e-9,
      "max_iters": 10000,
      "seed": 7
    }

``topology`` may instead describe a random graph ``{"n": 20, "density": 0.3}``
(optional ``"seed"``), ``x0`` may be ``{"kind": "uniform"}`` (optional
``"low"``/``"high"`` inside S), and ``link`` an object
``{"kind": "baseband", "m": 256, "noise_sigma2": 1e-4}``. Random parts are
resolved at load time from the scenario seed, which ``AIRMAX_SEED`` overrides.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np

import env_loader
import streams
from config import DEFAULT_DENSITY, MAX_ITERS, REL_TOL, SCENARIO_VERSION, default_channel, default_ranges
from consensus.protocols import PROTOCOLS
from network.graph import DirectedTopology, TopologyError, random_strongly_connected
from radio.airlink import AirLink, SignalRanges
from radio.baseband import BasebandConfig, BasebandLink
from radio.channel import ChannelModel
from utils import get_sim_logger

logger = get_sim_logger("scenario")

LINKS = ("airlink", "baseband")

_FIELDS = {
    "version", "name", "topology", "x0", "channel", "protocol", "link",
    "ranges", "rel_tol", "max_iters", "seed",
}


class ScenarioError(ValueError):
    """A scenario failed validation; ``field`` is the dotted path at fault."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


@dataclass(frozen=True)
class ScenarioConfig:
    topology: DirectedTopology
    x0: tuple[float, ...]
    channel: ChannelModel
    protocol: str
    ranges: SignalRanges
    link: str = "airlink"
    baseband: Optional[BasebandConfig] = None
    rel_tol: float = REL_TOL
    max_iters: int = MAX_ITERS
    seed: int = 0
    name: str = "scenario"

    def __post_init__(self):
        object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))
        if len(self.x0) != self.topology.node_count:
            raise ScenarioError(
                "x0", f"{len(self.x0)} values for a {self.topology.node_count}-agent topology"
            )
        for idx, v in enumerate(self.x0):
            if not self.ranges.contains(v):
                raise ScenarioError(
                    f"x0[{idx}]", f"{v} outside S = [{self.ranges.s_min}, {self.ranges.s_max}]"
                )
        if self.protocol not in PROTOCOLS:
            raise ScenarioError("protocol", f"must be one of {PROTOCOLS}, got {self.protocol!r}")
        if self.link not in LINKS:
            raise ScenarioError("link", f"must be one of {LINKS}, got {self.link!r}")
        if self.link == "baseband" and self.baseband is None:
            object.__setattr__(self, "baseband", BasebandConfig(self.ranges))
        if not self.rel_tol > 0:
            raise ScenarioError("rel_tol", f"must be > 0, got {self.rel_tol}")
        if self.max_iters < 1:
            raise ScenarioError("max_iters", f"must be >= 1, got {self.max_iters}")
        if not 0 <= self.seed < 2**64:
            raise ScenarioError("seed", f"must fit in 64 unsigned bits, got {self.seed}")

    @property
    def n(self) -> int:
        return self.topology.node_count

    def build_link(self):
        if self.link == "baseband":
            return BasebandLink(self.baseband, self.channel)
        return AirLink(self.ranges)

    def with_protocol(self, protocol: str) -> "ScenarioConfig":
        return replace(self, protocol=protocol)

    def to_dict(self) -> dict:
        """Fully resolved scenario; parsing it back gives the same config."""
        link: Any = self.link
        if self.link == "baseband":
            link = {"kind": "baseband", **self.baseband.to_dict()}
        return {
            "version": SCENARIO_VERSION,
            "name": self.name,
            "topology": self.topology.to_dict(),
            "x0": list(self.x0),
            "channel": self.channel.to_dict(),
            "protocol": self.protocol,
            "link": link,
            "ranges": self.ranges.to_dict(),
            "rel_tol": self.rel_tol,
            "max_iters": self.max_iters,
            "seed": self.seed,
        }


# ── parsing ─────────────────────────────────────────────────────────────────

def _number(payload: Mapping, key: str, path: str, default=None, kind=float):
    raw = payload.get(key, default)
    if raw is None:
        raise ScenarioError(path, "is required")
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ScenarioError(path, f"must be a number, got {raw!r}")
    if kind is int and isinstance(raw, float) and not raw.is_integer():
        raise ScenarioError(path, f"must be an integer, got {raw!r}")
    return kind(raw)


def _parse_ranges(raw: Any) -> SignalRanges:
    raw = default_ranges if raw is None else raw
    if not isinstance(raw, Mapping):
        raise ScenarioError("ranges", "must be an object {'s': [lo, hi], 'p': [lo, hi]}")
    for key in ("s", "p"):
        pair = raw.get(key)
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ScenarioError(f"ranges.{key}", f"must be a [low, high] pair, got {pair!r}")
    try:
        return SignalRanges.from_dict(raw)
    except (TypeError, ValueError) as e:
        raise ScenarioError("ranges", str(e)) from e


def _parse_topology(raw: Any, seed: int) -> DirectedTopology:
    if not isinstance(raw, Mapping):
        raise ScenarioError("topology", "must be an object")
    if "arcs" in raw:
        try:
            return DirectedTopology.from_dict(raw)
        except TopologyError as e:
            raise ScenarioError("topology", str(e)) from e

    n = _number(raw, "n", "topology.n", kind=int)
    density = _number(raw, "density", "topology.density", default=DEFAULT_DENSITY)
    topo_seed = _number(raw, "seed", "topology.seed", default=seed, kind=int)
    try:
        return random_strongly_connected(n, density, streams.generator(topo_seed, streams.TOPOLOGY))
    except (TopologyError, ValueError) as e:
        raise ScenarioError("topology", str(e)) from e


def _parse_x0(raw: Any, n: int, ranges: SignalRanges, seed: int) -> tuple[float, ...]:
    if isinstance(raw, list):
        for idx, v in enumerate(raw):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ScenarioError(f"x0[{idx}]", f"must be a number, got {v!r}")
        return tuple(float(v) for v in raw)
    if not isinstance(raw, Mapping) or raw.get("kind") != "uniform":
        raise ScenarioError("x0", "must be a list of numbers or {'kind': 'uniform'}")
    low = _number(raw, "low", "x0.low", default=ranges.s_min)
    high = _number(raw, "high", "x0.high", default=ranges.s_max)
    if not ranges.s_min <= low <= high <= ranges.s_max:
        raise ScenarioError("x0", f"[{low}, {high}] must lie inside S = [{ranges.s_min}, {ranges.s_max}]")
    rng = streams.generator(seed, streams.INITIAL_STATE)
    return tuple(float(v) for v in rng.uniform(low, high, n))


def _parse_channel(raw: Any) -> ChannelModel:
    raw = default_channel if raw is None else raw
    if not isinstance(raw, Mapping):
        raise ScenarioError("channel", "must be an object with a 'kind'")
    for key in ("value", "scale", "k_factor"):
        if key in raw:
            _number(raw, key, f"channel.{key}")
    try:
        return ChannelModel.from_dict(raw)
    except ValueError as e:
        raise ScenarioError("channel", str(e)) from e


def _parse_link(raw: Any, ranges: SignalRanges) -> tuple[str, Optional[BasebandConfig]]:
    if raw is None or raw == "airlink":
        return "airlink", None
    if raw == "baseband":
        return "baseband", BasebandConfig(ranges)
    if isinstance(raw, Mapping) and raw.get("kind") in LINKS:
        if raw["kind"] == "airlink":
            return "airlink", None
        if "m" in raw:
            _number(raw, "m", "link.m", kind=int)
        for key in ("noise_sigma2", "pilot_noise_sigma2"):
            if key in raw:
                _number(raw, key, f"link.{key}")
        try:
            return "baseband", BasebandConfig.from_dict(raw, ranges)
        except ValueError as e:
            raise ScenarioError("link", str(e)) from e
    raise ScenarioError("link", f"must be one of {LINKS} or {{'kind': ...}}, got {raw!r}")


def parse(payload: Any, name: str = "scenario") -> ScenarioConfig:
    """Validate a decoded scenario object and resolve its random parts."""
    if not isinstance(payload, Mapping):
        raise ScenarioError("<root>", "scenario must be a JSON object")
    unknown = sorted(set(payload) - _FIELDS)
    if unknown:
        raise ScenarioError(unknown[0], "unknown field")
    version = payload.get("version", SCENARIO_VERSION)
    if version != SCENARIO_VERSION:
        raise ScenarioError("version", f"unsupported version {version!r}, expected {SCENARIO_VERSION}")

    seed = _number(payload, "seed", "seed", default=0, kind=int)
    override = env_loader.seed_override()
    if override is not None:
        logger.info("Seed %d overridden by %s=%d", seed, env_loader.SEED_VAR, override)
        seed = override
    if not 0 <= seed < 2**64:
        raise ScenarioError("seed", f"must fit in 64 unsigned bits, got {seed}")

    ranges = _parse_ranges(payload.get("ranges"))
    if "topology" not in payload:
        raise ScenarioError("topology", "is required")
    topology = _parse_topology(payload["topology"], seed)
    if "x0" not in payload:
        raise ScenarioError("x0", "is required")
    x0 = _parse_x0(payload["x0"], topology.node_count, ranges, seed)
    channel = _parse_channel(payload.get("channel"))
    link, baseband = _parse_link(payload.get("link"), ranges)

    protocol = payload.get("protocol")
    if not isinstance(protocol, str):
        raise ScenarioError("protocol", f"must be one of {PROTOCOLS}, got {protocol!r}")

    return ScenarioConfig(
        topology=topology,
        x0=x0,
        channel=channel,
        protocol=protocol,
        ranges=ranges,
        link=link,
        baseband=baseband,
        rel_tol=_number(payload, "rel_tol", "rel_tol", default=REL_TOL),
        max_iters=_number(payload, "max_iters", "max_iters", default=MAX_ITERS, kind=int),
        seed=seed,
        name=str(payload.get("name", name)),
    )


def load_scenario(path) -> ScenarioConfig:
    """Read and validate a scenario file. Malformed JSON raises ScenarioError."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError("<root>", f"{path.name} is not valid JSON: {e}") from e
    return parse(payload, name=path.stem)


def random_scenario(
    n: int,
    seed: int,
    protocol: str,
    *,
    density: float = DEFAULT_DENSITY,
    channel: Optional[ChannelModel] = None,
    ranges: Optional[SignalRanges] = None,
    max_iters: int = MAX_ITERS,
) -> ScenarioConfig:
    """Random strongly connected topology and uniform x0, both keyed by ``seed``."""
    ranges = ranges or SignalRanges.from_dict(default_ranges)
    topology = random_strongly_connected(n, density, streams.generator(seed, streams.TOPOLOGY))
    x0 = streams.generator(seed, streams.INITIAL_STATE).uniform(ranges.s_min, ranges.s_max, n)
    return ScenarioConfig(
        topology=topology,
        x0=tuple(np.asarray(x0, dtype=float)),
        channel=channel or ChannelModel.from_dict(default_channel),
        protocol=protocol,
        ranges=ranges,
        max_iters=max_iters,
        seed=seed,
        name=f"random-n{n}",
    )
