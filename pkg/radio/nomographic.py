"""Nomographic approximations of max and why they break on the analog link.

Both approximations are post-processed weighted sums of pre-processed inputs,
the form a multiple-access channel computes for free:

    sum-of-powers   (Σ α_j x_j^p)^{1/p}
    log-sum-exp     (1/p) ln Σ α_j e^{p x_j}

They reach max(xs) as p grows, but the pre-processed values span
[pre(S_min), pre(S_max)], so the transmit scaling gain α collapses and any
receiver noise is amplified by 1/α after de-scaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from config import nomographic_defaults
from network.graph import DirectedTopology
from radio.airlink import SignalRanges
from utils import get_sim_logger

logger = get_sim_logger("nomographic")

APPROXIMATIONS = ("sum_of_powers", "log_sum_exp")


@dataclass(frozen=True)
class NomographicConfig:
    p: float
    alphas: tuple[float, ...]

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError(f"sharpness p must be > 0, got {self.p}")
        if any(a < 0 for a in self.alphas):
            raise ValueError(f"weights must be >= 0, got {self.alphas}")
        if not any(a > 0 for a in self.alphas):
            raise ValueError("at least one weight must be > 0")
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))

    @classmethod
    def uniform(cls, n: int, p: float) -> "NomographicConfig":
        """Weights 1/n, so that Σα = 1."""
        return cls(p, tuple([1.0 / n] * n))

    def with_p(self, p: float) -> "NomographicConfig":
        return NomographicConfig(p, self.alphas)


def _weighted_log_sum(logs: np.ndarray, alphas: Sequence[float]) -> float:
    """ln Σ α_j e^{logs_j}, with max-subtraction; zero weights drop out."""
    a = np.asarray(alphas, dtype=float)
    keep = a > 0
    terms = np.log(a[keep]) + logs[keep]
    top = np.max(terms)
    if not np.isfinite(top):
        return float(top)
    return float(top + np.log(np.sum(np.exp(terms - top))))


def _check_lengths(xs: Sequence[float], cfg: NomographicConfig) -> np.ndarray:
    arr = np.asarray(xs, dtype=float)
    if arr.size == 0:
        raise ValueError("at least one input is required")
    if arr.size != len(cfg.alphas):
        raise ValueError(f"{arr.size} inputs but {len(cfg.alphas)} weights")
    return arr


def sum_of_powers(xs: Sequence[float], cfg: NomographicConfig) -> float:
    arr = _check_lengths(xs, cfg)
    if np.any(arr <= 0):
        raise ValueError(f"sum-of-powers needs strictly positive inputs, got {list(arr)}")
    return math.exp(_weighted_log_sum(cfg.p * np.log(arr), cfg.alphas) / cfg.p)


def log_sum_exp(xs: Sequence[float], cfg: NomographicConfig) -> float:
    arr = _check_lengths(xs, cfg)
    return _weighted_log_sum(cfg.p * arr, cfg.alphas) / cfg.p


def approximate(xs: Sequence[float], cfg: NomographicConfig, which: str) -> float:
    if which == "sum_of_powers":
        return sum_of_powers(xs, cfg)
    if which == "log_sum_exp":
        return log_sum_exp(xs, cfg)
    raise ValueError(f"approximation must be one of {APPROXIMATIONS}, got {which!r}")


def approximation_error(xs: Sequence[float], cfg: NomographicConfig, which: str) -> float:
    """Signed ε = f̂(xs, p) − max(xs)."""
    return approximate(xs, cfg, which) - max(xs)


# ── analog pipeline ─────────────────────────────────────────────────────────

def _log_pre(x, p: float, which: str):
    """ln of the pre-processed value: p·ln x, or p·x."""
    if which == "sum_of_powers":
        with np.errstate(divide="ignore"):
            return p * np.log(np.asarray(x, dtype=float))
    return p * np.asarray(x, dtype=float)


def log_scaling_gain(ranges: SignalRanges, p: float, which: str) -> float:
    """ln α_p for pre-processed values spanning [pre(S_min), pre(S_max)]."""
    hi = float(_log_pre(ranges.s_max, p, which))
    lo = float(_log_pre(ranges.s_min, p, which))
    span = hi + math.log1p(-math.exp(lo - hi))
    return math.log(ranges.p_max - ranges.p_min) - span


def pipeline_estimate(
    xs: Sequence[float],
    cfg: NomographicConfig,
    which: str,
    ranges: SignalRanges,
    noise: float,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """Post-processed receiver output for one superposition of pre-processed inputs.

    The de-scaled sum is exact up to an additive η/α_p, η ~ N(0, noise²).
    A non-positive sum, or a result outside S, is projected onto S.
    """
    arr = _check_lengths(xs, cfg)
    if which not in APPROXIMATIONS:
        raise ValueError(f"approximation must be one of {APPROXIMATIONS}, got {which!r}")
    if any(not ranges.contains(x) for x in arr):
        raise ValueError(f"inputs {list(arr)} outside S = [{ranges.s_min}, {ranges.s_max}]")

    log_sum = _weighted_log_sum(_log_pre(arr, cfg.p, which), cfg.alphas)
    if noise > 0:
        if rng is None:
            raise ValueError("a generator is required when noise > 0")
        eta = float(rng.normal(0.0, noise))
        log_noise = math.log(abs(eta)) - log_scaling_gain(ranges, cfg.p, which) if eta else -math.inf
        top = max(log_sum, log_noise)
        scaled = math.exp(log_sum - top) + math.copysign(math.exp(log_noise - top), eta)
        if scaled <= 0:
            return ranges.s_min
        log_sum = top + math.log(scaled)

    if which == "sum_of_powers":
        value = math.exp(log_sum / cfg.p) if np.isfinite(log_sum) else 0.0
    else:
        value = log_sum / cfg.p
    return min(max(value, ranges.s_min), ranges.s_max)


def demo_failure_under_pipeline(
    xs: Sequence[float],
    p_values: Sequence[float],
    cfg: NomographicConfig,
    ranges: SignalRanges,
    noise: Optional[float] = None,
    rng: Optional[np.random.Generator] = None,
    which: str = "sum_of_powers",
) -> pd.DataFrame:
    """|ε| of the analog pipeline for each p; columns p, abs_error.

    ``noise`` defaults to a fixed fraction of (P_max − P_min).
    """
    if noise is None:
        noise = nomographic_defaults["noise_fraction"] * (ranges.p_max - ranges.p_min)
    true_max = max(xs)
    rows = []
    for p in p_values:
        estimate = pipeline_estimate(xs, cfg.with_p(p), which, ranges, noise, rng)
        rows.append({"p": p, "abs_error": abs(estimate - true_max)})
        logger.debug("[%s] p=%s → f̂=%.6g (max %.6g)", which, p, estimate, true_max)
    return pd.DataFrame(rows, columns=["p", "abs_error"])


def demo_iterative_shift(
    g: DirectedTopology,
    x0: Sequence[float],
    p: float,
    which: str,
    ranges: SignalRanges,
    noise: float,
    iterations: int,
    rng: np.random.Generator,
) -> pd.DataFrame:
    """Max-consensus driven by the noisy nomographic estimate of each neighborhood.

    Every agent applies x_i ← max(x_i, f̂(x_{N_i ∪ {i}})). A single positive ε
    lifts some state above the true maximum, and the max update then spreads
    the wrong value. Columns: k, max_x, x_star.
    """
    x = np.asarray(x0, dtype=float).copy()
    if x.size != g.node_count:
        raise ValueError(f"{x.size} initial states for a {g.node_count}-node topology")
    x_star = float(x.max())
    rows = [{"k": 0, "max_x": x_star, "x_star": x_star}]
    for k in range(1, iterations + 1):
        nxt = x.copy()
        for i in g.nodes:
            group = (i,) + g.in_neighbors(i)
            cfg = NomographicConfig.uniform(len(group), p)
            nxt[i] = max(x[i], pipeline_estimate(x[list(group)], cfg, which, ranges, noise, rng))
        x = nxt
        rows.append({"k": k, "max_x": float(x.max()), "x_star": x_star})
    return pd.DataFrame(rows, columns=["k", "max_x", "x_star"])
