"""Directed communication topology of the multi-agent system.

Node ids are dense integers ``0..n-1``. An arc ``(j, i)`` means that agent
``j`` transmits to agent ``i``; the in-neighbors of ``i`` are therefore the
agents it hears.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable

import networkx as nx
import numpy as np

from utils import get_sim_logger

logger = get_sim_logger("graph")


class TopologyError(ValueError):
    """Raised for malformed topologies or ones unfit for the requested analysis."""


@dataclass(frozen=True)
class DirectedTopology:
    node_count: int
    arcs: frozenset[tuple[int, int]]
    _in_neighbors: tuple[tuple[int, ...], ...] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        if self.node_count <= 1:
            raise TopologyError(f"a topology needs n > 1 agents, got {self.node_count}")
        arcs = frozenset((int(j), int(i)) for j, i in self.arcs)
        for j, i in arcs:
            if not (0 <= j < self.node_count and 0 <= i < self.node_count):
                raise TopologyError(f"arc ({j}, {i}) references a node outside 0..{self.node_count - 1}")
            if j == i:
                raise TopologyError(f"self-loop ({i}, {i}) is not allowed")
        object.__setattr__(self, "arcs", arcs)

        incoming: list[list[int]] = [[] for _ in range(self.node_count)]
        for j, i in arcs:
            incoming[i].append(j)
        object.__setattr__(
            self, "_in_neighbors", tuple(tuple(sorted(nbrs)) for nbrs in incoming)
        )

    @property
    def nodes(self) -> range:
        return range(self.node_count)

    def in_neighbors(self, i: int) -> tuple[int, ...]:
        self._check_node(i)
        return self._in_neighbors[i]

    def _check_node(self, i: int) -> None:
        if not isinstance(i, (int, np.integer)) or not 0 <= i < self.node_count:
            raise TopologyError(f"invalid node id {i!r} for a {self.node_count}-node topology")

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(self.arcs)
        return g

    def to_dict(self) -> dict:
        return {"n": self.node_count, "arcs": [list(a) for a in sorted(self.arcs)]}

    @classmethod
    def from_dict(cls, payload: dict) -> "DirectedTopology":
        try:
            n = int(payload["n"])
            arcs = [(int(a[0]), int(a[1])) for a in payload["arcs"]]
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise TopologyError(f"topology must look like {{'n': int, 'arcs': [[j, i], ...]}}: {e}") from e
        return cls(n, frozenset(arcs))

    def fingerprint(self) -> str:
        """Stable hash of the node count and arc set."""
        payload = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()[:16]


def in_neighbors(g: DirectedTopology, i: int) -> set[int]:
    """Return { j | (j, i) ∈ arcs }."""
    return set(g.in_neighbors(i))


def is_strongly_connected(g: DirectedTopology) -> bool:
    return nx.is_strongly_connected(g.to_networkx())


def diameter_bound(g: DirectedTopology) -> int:
    """Longest shortest path over ordered node pairs.

    This is the number of iterations after which the standard protocol has
    certainly converged.
    """
    if not is_strongly_connected(g):
        raise TopologyError("diameter bound is only defined for strongly connected topologies")
    lengths = dict(nx.all_pairs_shortest_path_length(g.to_networkx()))
    return max(max(row.values()) for row in lengths.values())


def random_strongly_connected(
    n: int, density: float, rng: np.random.Generator
) -> DirectedTopology:
    """Random Hamiltonian cycle plus independent extra arcs.

    The cycle guarantees strong connectivity; every remaining ordered pair is
    then added with probability ``density``.
    """
    if n < 2:
        raise TopologyError(f"random topologies need n >= 2, got {n}")
    if not 0.0 < density <= 1.0:
        raise TopologyError(f"density must lie in (0, 1], got {density}")

    order = rng.permutation(n)
    arcs = {(int(order[k]), int(order[(k + 1) % n])) for k in range(n)}

    # one uniform per ordered pair, in row-major order, so the draw is fixed by (n, seed)
    coins = rng.random((n, n))
    for j in range(n):
        for i in range(n):
            if j != i and (j, i) not in arcs and coins[j, i] < density:
                arcs.add((j, i))

    g = DirectedTopology(n, frozenset(arcs))
    logger.debug("Random topology n=%d density=%.3f → %d arcs", n, density, len(arcs))
    return g


# ── named constructors ───────────────────────────────────────────────────────

def complete(n: int) -> DirectedTopology:
    return DirectedTopology(n, frozenset((j, i) for j in range(n) for i in range(n) if j != i))


def directed_cycle(n: int) -> DirectedTopology:
    return DirectedTopology(n, frozenset((k, (k + 1) % n) for k in range(n)))


def bidirectional_path(n: int) -> DirectedTopology:
    arcs: set[tuple[int, int]] = set()
    for k in range(n - 1):
        arcs.update({(k, k + 1), (k + 1, k)})
    return DirectedTopology(n, frozenset(arcs))


def from_arcs(n: int, arcs: Iterable[tuple[int, int]]) -> DirectedTopology:
    return DirectedTopology(n, frozenset(arcs))
