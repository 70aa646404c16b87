"""Max-consensus state machines and the run loop.

Three protocols share one state vector w(k) = [x(k); y(k)]:

standard    every agent hears every in-neighbor in its own TDMA slot and
            keeps the largest value (n slots per iteration).
asymptotic  authorized in-neighbors broadcast simultaneously; agent i
            receives the convex combination u_i and keeps max(x_i, u_i). It
            stays authorized only while no neighbor outbid it.
ftc         as asymptotic, but at the switch steps k = 2·T(k) the
            authorization is the product of y over the window [T(k), k],
            which silences every agent that was ever outbid in that window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Mapping, Optional, Sequence

import numpy as np

import streams
from config import INITIAL_WINDOW, SUPERPOSITION_SLOTS
from network.graph import DirectedTopology, TopologyError, is_strongly_connected
from radio.airlink import Link
from radio.channel import CoefficientDraw, draw_from_matrix, draw_matrix
from utils import get_sim_logger

if TYPE_CHECKING:
    from harness.scenario import ScenarioConfig

logger = get_sim_logger("protocols")

PROTOCOLS = ("standard", "asymptotic", "ftc")


@dataclass(frozen=True)
class ConsensusState:
    x: np.ndarray
    y: np.ndarray
    t_window: int = INITIAL_WINDOW
    y_products: Optional[np.ndarray] = None
    k: int = 0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=bool)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError(f"x and y must be vectors of equal length, got {x.shape} and {y.shape}")
        products = np.ones_like(y) if self.y_products is None else np.asarray(self.y_products, dtype=bool)
        if products.shape != y.shape:
            raise ValueError(f"y_products must have shape {y.shape}, got {products.shape}")
        if self.t_window < 1:
            raise ValueError(f"t_window must be a positive integer, got {self.t_window}")
        if self.k < 0:
            raise ValueError(f"iteration counter must be >= 0, got {self.k}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "y_products", products)

    @property
    def n(self) -> int:
        return self.x.size


def initial_state(x0: Sequence[float]) -> ConsensusState:
    """w(0) = [x0; 1] with T(0) = 2 and an all-true window product."""
    x = np.asarray(x0, dtype=float)
    return ConsensusState(x=x.copy(), y=np.ones(x.size, dtype=bool))


def equilibrium_state(n: int, x_star: float) -> ConsensusState:
    return initial_state([x_star] * n)


@dataclass(frozen=True)
class StepOutcome:
    next: ConsensusState
    u: np.ndarray
    slots_consumed: int


def _check_sizes(g: DirectedTopology, state: ConsensusState) -> None:
    if state.n != g.node_count:
        raise ValueError(f"state has {state.n} agents but the topology has {g.node_count}")


def step_standard(g: DirectedTopology, state: ConsensusState) -> StepOutcome:
    """x_i ← max over N_i ∪ {i}; u_i is the largest value heard (0 if none)."""
    _check_sizes(g, state)
    u = np.zeros(state.n)
    for i in g.nodes:
        nbrs = g.in_neighbors(i)
        if nbrs:
            u[i] = state.x[list(nbrs)].max()
    x_next = np.maximum(state.x, u)
    nxt = replace(state, x=x_next, k=state.k + 1)
    return StepOutcome(nxt, u, g.node_count)


def authorized_neighbors(g: DirectedTopology, y: np.ndarray, i: int) -> tuple[int, ...]:
    """N_i^m(k) = { j ∈ N_i | y_j(k) = 1 }."""
    return tuple(j for j in g.in_neighbors(i) if y[j])


def _superposed_inputs(
    g: DirectedTopology,
    state: ConsensusState,
    link: Link,
    draws: Mapping[int, CoefficientDraw],
    rng: Optional[np.random.Generator],
) -> np.ndarray:
    _check_sizes(g, state)
    u = np.zeros(state.n)
    for i in g.nodes:
        authorized = authorized_neighbors(g, state.y, i)
        if not authorized:
            continue
        draw = draws[i].restrict(authorized)
        u[i] = link.receive({j: float(state.x[j]) for j in authorized}, draw, rng)
    return u


def step_asymptotic(
    g: DirectedTopology,
    state: ConsensusState,
    link: Link,
    draws: Mapping[int, CoefficientDraw],
    rng: Optional[np.random.Generator] = None,
) -> StepOutcome:
    u = _superposed_inputs(g, state, link, draws, rng)
    x_next = np.maximum(state.x, u)
    # ties keep the authorization
    y_next = state.x >= u
    nxt = replace(state, x=x_next, y=y_next, k=state.k + 1)
    return StepOutcome(nxt, u, SUPERPOSITION_SLOTS)


def step_ftc(
    g: DirectedTopology,
    state: ConsensusState,
    link: Link,
    draws: Mapping[int, CoefficientDraw],
    rng: Optional[np.random.Generator] = None,
) -> StepOutcome:
    u = _superposed_inputs(g, state, link, draws, rng)
    x_next = np.maximum(state.x, u)
    k, t_window = state.k, state.t_window

    if k == 2 * t_window:
        # y(k+1) = Π_{t=T(k)}^{k} y(t), already folded into y_products
        y_next = state.y_products.copy()
        t_window = k
        products = y_next.copy()
        logger.debug("FTC switch at k=%d: %d of %d agents stay authorized",
                     k, int(y_next.sum()), state.n)
    else:
        y_next = state.x >= u
        if k + 1 <= t_window:
            products = y_next.copy()
        else:
            products = state.y_products & y_next

    nxt = ConsensusState(x=x_next, y=y_next, t_window=t_window, y_products=products, k=k + 1)
    return StepOutcome(nxt, u, SUPERPOSITION_SLOTS)


def t_closed_form(k: int) -> int:
    """2^⌈log₂(k) − 1⌉ for k >= 2, else 2.

    A cross-check only: at k = 2 it gives 1 while the recurrence keeps 2.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if k < 2:
        return 2
    # ⌈log₂ k⌉ without floating point
    return 2 ** ((k - 1).bit_length() - 1)


def t_recurrence(k: int) -> int:
    """T(k) obtained by stepping the switch rule from T(0) = 2."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    t = INITIAL_WINDOW
    for step in range(k):
        if step == 2 * t:
            t = step
    return t


def lyapunov_v(state_now: Sequence[float], state_prev: Sequence[float], x_star: float) -> float:
    """V = 2n·x* − Σ_i (x_i(k) + x_i(k−1))."""
    now = np.asarray(state_now, dtype=float)
    prev = np.asarray(state_prev, dtype=float)
    if now.shape != prev.shape:
        raise ValueError(f"state vectors differ in shape: {now.shape} vs {prev.shape}")
    top = max(now.max(initial=-math.inf), prev.max(initial=-math.inf))
    if x_star < top:
        raise ValueError(f"x* = {x_star} is below the largest state component {top}")
    # summing non-negative gaps keeps the result >= 0 under rounding
    return math.fsum(x_star - now) + math.fsum(x_star - prev)


# ── run loop ────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class TraceRecord:
    k: int
    agent: int
    x: float
    y: bool
    t_window: int
    u: float
    v_lyapunov: float


@dataclass
class RunResult:
    protocol: str
    converged: bool
    iterations: int
    slots: int
    x_star: float
    final_x: list[float]
    fingerprint: str
    trace: list[TraceRecord] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.final_x)


def is_converged(x: np.ndarray, x_star: float, rel_tol: float) -> bool:
    return float(np.max(np.abs(x - x_star))) <= rel_tol * max(1.0, abs(x_star))


def _trace_rows(state: ConsensusState, u: np.ndarray, v: float) -> list[TraceRecord]:
    return [
        TraceRecord(state.k, i, float(state.x[i]), bool(state.y[i]), state.t_window, float(u[i]), v)
        for i in range(state.n)
    ]


def run(
    scenario: "ScenarioConfig",
    *,
    record_trace: bool = True,
    start: Optional[ConsensusState] = None,
) -> RunResult:
    """Step the scenario's protocol until consensus or ``max_iters``.

    The coefficient matrix of iteration k comes from the stream
    ``(seed, CHANNEL, k)`` and the link's noise from ``(seed, LINK, k)``, so a
    trace depends only on the scenario and its seed. Trace rows at iteration k
    carry the inputs u(k) of the step leaving k; the final state has u = NaN.
    """
    g = scenario.topology
    protocol = scenario.protocol
    if protocol not in PROTOCOLS:
        raise ValueError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")
    if protocol != "standard" and not is_strongly_connected(g):
        raise TopologyError(f"protocol {protocol!r} requires a strongly connected topology")

    state = start if start is not None else initial_state(scenario.x0)
    _check_sizes(g, state)
    x_star = float(np.max(scenario.x0))
    link = scenario.build_link() if protocol != "standard" else None

    trace: list[TraceRecord] = []
    prev_x = state.x
    slots = 0
    exceeded = False

    while not is_converged(state.x, x_star, scenario.rel_tol) and state.k < scenario.max_iters:
        k = state.k
        if protocol == "standard":
            outcome = step_standard(g, state)
        else:
            matrix = draw_matrix(scenario.channel, g.node_count, streams.generator(scenario.seed, streams.CHANNEL, k))
            draws = {i: draw_from_matrix(matrix, i, g.in_neighbors(i)) for i in g.nodes}
            link_rng = streams.generator(scenario.seed, streams.LINK, k)
            step = step_asymptotic if protocol == "asymptotic" else step_ftc
            outcome = step(g, state, link, draws, link_rng)

        nxt = outcome.next
        if np.any(nxt.x < state.x):
            raise RuntimeError(f"k={k}: a state decreased, which the update rule forbids")
        if not exceeded and nxt.x.max() > x_star:
            exceeded = True
            logger.warning("k=%d: link estimate pushed a state above x*=%.6g (max %.6g)",
                           k, x_star, nxt.x.max())

        if record_trace:
            v = lyapunov_v(state.x, prev_x, max(x_star, float(state.x.max()), float(prev_x.max())))
            trace.extend(_trace_rows(state, outcome.u, v))
        prev_x = state.x
        state = nxt
        slots += outcome.slots_consumed

    converged = is_converged(state.x, x_star, scenario.rel_tol)
    if record_trace:
        v = lyapunov_v(state.x, prev_x, max(x_star, float(state.x.max()), float(prev_x.max())))
        trace.extend(_trace_rows(state, np.full(state.n, np.nan), v))

    if converged:
        logger.info("%s: consensus on x*=%.6g after %d iterations (%d slots)",
                    protocol, x_star, state.k, slots)
    else:
        logger.warning("%s: no consensus within %d iterations", protocol, scenario.max_iters)

    return RunResult(
        protocol=protocol,
        converged=converged,
        iterations=state.k,
        slots=slots,
        x_star=x_star,
        final_x=[float(v) for v in state.x],
        fingerprint=g.fingerprint(),
        trace=trace,
    )
