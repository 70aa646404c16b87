"""Post-hoc checks over run traces."""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Optional

import numpy as np

from config import INITIAL_WINDOW
from consensus.protocols import TraceRecord


def _by_iteration(trace: Iterable[TraceRecord]) -> dict[int, list[TraceRecord]]:
    rows: dict[int, list[TraceRecord]] = defaultdict(list)
    for r in trace:
        rows[r.k].append(r)
    for k in rows:
        rows[k].sort(key=lambda r: r.agent)
    return dict(sorted(rows.items()))


def states_matrix(trace: Iterable[TraceRecord]) -> np.ndarray:
    """x(k) stacked by iteration: shape (iterations + 1, n)."""
    return np.array([[r.x for r in rows] for rows in _by_iteration(trace).values()])


def authorizations_matrix(trace: Iterable[TraceRecord]) -> np.ndarray:
    return np.array([[r.y for r in rows] for rows in _by_iteration(trace).values()], dtype=bool)


def inputs_matrix(trace: Iterable[TraceRecord]) -> np.ndarray:
    return np.array([[r.u for r in rows] for rows in _by_iteration(trace).values()])


def lyapunov_series(trace: Iterable[TraceRecord]) -> list[float]:
    return [rows[0].v_lyapunov for rows in _by_iteration(trace).values()]


def maximal_set_sizes(trace: Iterable[TraceRecord], x_star: float, tol: float = 0.0) -> list[int]:
    """|M_k|: agents within ``tol`` of x* at each iteration."""
    return [int(np.sum(np.abs(row - x_star) <= tol)) for row in states_matrix(trace)]


def authorization_losses(trace: Iterable[TraceRecord]) -> dict[int, Optional[int]]:
    """First iteration at which each agent has y = 0, or None if it never does."""
    first: dict[int, Optional[int]] = {}
    for k, rows in _by_iteration(trace).items():
        for r in rows:
            first.setdefault(r.agent, None)
            if not r.y and first[r.agent] is None:
                first[r.agent] = k
    return first


def switch_steps(max_k: int) -> list[int]:
    """Iterations k <= max_k at which the FTC protocol applies the window product."""
    steps = []
    t = INITIAL_WINDOW
    for k in range(max_k + 1):
        if k == 2 * t:
            steps.append(k)
            t = k
    return steps


def monotone_and_bounded(trace: Iterable[TraceRecord], x_star: float) -> bool:
    x = states_matrix(trace)
    return bool(np.all(np.diff(x, axis=0) >= 0) and np.all(x <= x_star))
