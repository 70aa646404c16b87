"""Fading coefficients and the wireless multiple-access superposition."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from utils import get_sim_logger

logger = get_sim_logger("channel")

KINDS = ("constant", "rayleigh", "rician")

_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class ChannelModel:
    """Distribution of the real, strictly positive coefficients ξ_ij(k).

    Rayleigh(scale) has density x/σ²·exp(−x²/2σ²). Rician(k_factor, scale)
    adds a line-of-sight amplitude ν = σ·√(2K) to the same diffuse component,
    so Rician with K = 0 is Rayleigh.
    """

    kind: str
    value: float = 1.0
    scale: float = 1.0
    k_factor: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"channel kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "constant" and not self.value > 0:
            raise ValueError(f"constant channel value must be > 0, got {self.value}")
        if self.kind in ("rayleigh", "rician") and not self.scale > 0:
            raise ValueError(f"channel scale must be > 0, got {self.scale}")
        if self.kind == "rician" and not self.k_factor >= 0:
            raise ValueError(f"rician k_factor must be >= 0, got {self.k_factor}")

    @classmethod
    def constant(cls, value: float = 1.0) -> "ChannelModel":
        return cls("constant", value=value)

    @classmethod
    def rayleigh(cls, scale: float = 1.0) -> "ChannelModel":
        return cls("rayleigh", scale=scale)

    @classmethod
    def rician(cls, k_factor: float, scale: float = 1.0) -> "ChannelModel":
        return cls("rician", scale=scale, k_factor=k_factor)

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        if self.kind == "rayleigh":
            return {"kind": "rayleigh", "scale": self.scale}
        return {"kind": "rician", "k_factor": self.k_factor, "scale": self.scale}

    @classmethod
    def from_dict(cls, payload: Mapping) -> "ChannelModel":
        kind = payload.get("kind")
        if kind == "constant":
            return cls.constant(float(payload.get("value", 1.0)))
        if kind == "rayleigh":
            return cls.rayleigh(float(payload.get("scale", 1.0)))
        if kind == "rician":
            if "k_factor" not in payload:
                raise ValueError("rician channel requires 'k_factor'")
            return cls.rician(float(payload["k_factor"]), float(payload.get("scale", 1.0)))
        raise ValueError(f"channel kind must be one of {KINDS}, got {kind!r}")

    def sample(self, shape, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "constant":
            return np.full(shape, self.value, dtype=float)
        if self.kind == "rayleigh":
            values = rng.rayleigh(self.scale, size=shape)
        else:
            los = self.scale * math.sqrt(2.0 * self.k_factor)
            diffuse = self.scale * (
                rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
            )
            values = np.abs(los + diffuse)
        # a zero draw has probability zero but would break positivity downstream
        return np.where(values > 0, values, _TINY)

    def power(self) -> float:
        """E[ξ²] of the coefficient magnitude."""
        if self.kind == "constant":
            return self.value**2
        return 2.0 * self.scale**2 * (1.0 + self.k_factor)


@dataclass(frozen=True)
class CoefficientDraw:
    receiver: int
    values: Mapping[int, float]

    def __post_init__(self):
        for j, v in self.values.items():
            if not v > 0:
                raise ValueError(f"coefficient for transmitter {j} must be > 0, got {v}")

    @property
    def transmitters(self) -> frozenset[int]:
        return frozenset(self.values)

    def restrict(self, transmitters: Iterable[int]) -> "CoefficientDraw":
        keep = set(transmitters)
        missing = keep - set(self.values)
        if missing:
            raise ValueError(f"no coefficient drawn for transmitters {sorted(missing)}")
        return CoefficientDraw(self.receiver, {j: self.values[j] for j in sorted(keep)})


def draw_matrix(model: ChannelModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Coefficients of one iteration: entry [i, j] is ξ_ij, receiver i, transmitter j."""
    return model.sample((n, n), rng)


def draw_from_matrix(
    matrix: np.ndarray, receiver: int, transmitters: Iterable[int]
) -> CoefficientDraw:
    return CoefficientDraw(
        receiver, {int(j): float(matrix[receiver, j]) for j in sorted(transmitters)}
    )


def draw_coefficients(
    model: ChannelModel,
    receiver: int,
    transmitters: Iterable[int],
    rng: np.random.Generator,
) -> CoefficientDraw:
    """One independent coefficient per (transmitter, receiver) pair."""
    ordered = sorted(set(transmitters))
    if not ordered:
        raise ValueError(f"receiver {receiver}: cannot draw coefficients for an empty transmitter set")
    values = model.sample(len(ordered), rng)
    return CoefficientDraw(receiver, {j: float(v) for j, v in zip(ordered, values)})


def normalize(draw: CoefficientDraw) -> dict[int, float]:
    """h_ij = ξ_ij / Σ_q ξ_iq."""
    total = math.fsum(draw.values.values())
    return {j: v / total for j, v in draw.values.items()}


def _check_keys(signals: Mapping[int, float], draw: CoefficientDraw) -> None:
    if set(signals) != set(draw.values):
        raise ValueError(
            f"receiver {draw.receiver}: signals keyed by {sorted(signals)} "
            f"but coefficients drawn for {sorted(draw.values)}"
        )


def wmac_superpose(signals: Mapping[int, float], draw: CoefficientDraw) -> float:
    """Σ_j ξ_ij · ω_j as seen by the receiver; receiver noise is neglected."""
    _check_keys(signals, draw)
    return math.fsum(draw.values[j] * signals[j] for j in signals)
