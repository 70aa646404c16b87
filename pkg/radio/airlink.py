"""Transmitter/receiver processing of one synchronized broadcast round.

Each authorized transmitter j sends Φ(x_j) on the data channel and the pilot
Φ(1) on an orthogonal channel. Both go through the same coefficients ξ_ij, so
the receiver can divide out the unknown channel gain:

    r_i  = Σ ξ_ij (α x_j + β)          r'_i = (α + β) Σ ξ_ij
    Ψ    = (r_i − β/(α+β) · r'_i) / α  u_i  = (α + β) Ψ / r'_i = Σ h_ij x_j
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Protocol

import numpy as np

from radio.channel import CoefficientDraw, wmac_superpose


@dataclass(frozen=True)
class SignalRanges:
    s_min: float
    s_max: float
    p_min: float
    p_max: float

    def __post_init__(self):
        if not 0 <= self.s_min < self.s_max:
            raise ValueError(f"state range needs 0 <= s_min < s_max, got [{self.s_min}, {self.s_max}]")
        if not 0 <= self.p_min < self.p_max:
            raise ValueError(f"power range needs 0 <= p_min < p_max, got [{self.p_min}, {self.p_max}]")

    @property
    def alpha(self) -> float:
        return (self.p_max - self.p_min) / (self.s_max - self.s_min)

    @property
    def beta(self) -> float:
        return self.p_min - self.alpha * self.s_min

    def contains(self, x: float) -> bool:
        return self.s_min <= x <= self.s_max

    def to_dict(self) -> dict:
        return {"s": [self.s_min, self.s_max], "p": [self.p_min, self.p_max]}

    @classmethod
    def from_dict(cls, payload: Mapping) -> "SignalRanges":
        (s_min, s_max), (p_min, p_max) = payload["s"], payload["p"]
        return cls(float(s_min), float(s_max), float(p_min), float(p_max))


def scale(ranges: SignalRanges, x: float) -> float:
    """Φ(x) = αx + β, mapping S onto the transmit power range P."""
    if not ranges.contains(x):
        raise ValueError(f"state {x} outside S = [{ranges.s_min}, {ranges.s_max}]")
    return ranges.alpha * x + ranges.beta


def pilot(ranges: SignalRanges) -> float:
    """Dummy signal Φ(1) = α + β sent by every transmitter."""
    return ranges.alpha + ranges.beta


def descale(ranges: SignalRanges, r: float, r_pilot: float) -> float:
    """Ψ(r, r') = (r − β/(α+β) · r') / α."""
    a, b = ranges.alpha, ranges.beta
    return (r - b / (a + b) * r_pilot) / a


def receive_round(
    ranges: SignalRanges, states: Mapping[int, float], draw: CoefficientDraw
) -> float:
    """Convex combination Σ h_ij x_j recovered from one data + pilot round."""
    if not states:
        raise ValueError(f"receiver {draw.receiver}: no transmitter broadcast this round")
    data = {j: scale(ranges, x) for j, x in states.items()}
    pilots = {j: pilot(ranges) for j in states}
    r = wmac_superpose(data, draw)
    r_pilot = wmac_superpose(pilots, draw)
    u = (ranges.alpha + ranges.beta) * descale(ranges, r, r_pilot) / r_pilot
    # the value lies in the convex hull; rounding may push it out by a few ulps
    lo, hi = min(states.values()), max(states.values())
    return min(max(u, lo), hi)


class Link(Protocol):
    """Communication backend used by the superposition protocols."""

    name: str

    def receive(
        self,
        states: Mapping[int, float],
        draw: CoefficientDraw,
        rng: Optional[np.random.Generator] = None,
    ) -> float: ...


class AirLink:
    """Idealised analog link: noiseless real coefficients, exact de-scaling."""

    name = "airlink"

    def __init__(self, ranges: SignalRanges):
        self.ranges = ranges

    def receive(
        self,
        states: Mapping[int, float],
        draw: CoefficientDraw,
        rng: Optional[np.random.Generator] = None,
    ) -> float:
        return receive_round(self.ranges, states, draw)
