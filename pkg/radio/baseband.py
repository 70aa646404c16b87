"""M-symbol complex-baseband analog transceiver.

Transmitter j sends ω_j = √Φ(x_j)·[e^{iθ(1)}, …, e^{iθ(M)}] with i.i.d. uniform
phases, plus a unit-amplitude pilot on an orthogonal channel. Slow fading: one
complex ξ_j per transmitter holds for all M symbols of a round, and the pilot
sees the same ξ_j with its own noise stream.

The receiver takes Γ(r) = ‖r‖²/M − σ² on both channels, de-scales the data
with Ψ(γ) = (γ − β·γ')/α and outputs f̂ = Ψ/γ', which in expectation equals
Σ_j h_j x_j with h_j = |ξ_j|² / Σ_q |ξ_q|².
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np
import tenacity

from config import BASEBAND_RETRIES, default_baseband
from radio.airlink import SignalRanges, scale
from radio.channel import ChannelModel, CoefficientDraw
from utils import get_sim_logger

logger = get_sim_logger("baseband")


class SnrViolationError(RuntimeError):
    """The pilot estimate γ' came out non-positive: the high-SNR premise failed."""


@dataclass(frozen=True)
class BasebandConfig:
    ranges: SignalRanges
    m: int = default_baseband["m"]
    noise_sigma2: float = default_baseband["noise_sigma2"]
    pilot_noise_sigma2: float = default_baseband["pilot_noise_sigma2"]

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"symbol count M must be >= 1, got {self.m}")
        if self.noise_sigma2 < 0 or self.pilot_noise_sigma2 < 0:
            raise ValueError("noise variances must be >= 0")

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "noise_sigma2": self.noise_sigma2,
            "pilot_noise_sigma2": self.pilot_noise_sigma2,
        }

    @classmethod
    def from_dict(cls, payload: Mapping, ranges: SignalRanges) -> "BasebandConfig":
        m = payload.get("m", default_baseband["m"])
        if isinstance(m, bool) or not float(m).is_integer():
            raise ValueError(f"symbol count M must be an integer, got {m!r}")
        noise = float(payload.get("noise_sigma2", default_baseband["noise_sigma2"]))
        return cls(
            ranges=ranges,
            m=int(m),
            noise_sigma2=noise,
            # the pilot noise defaults to the data noise
            pilot_noise_sigma2=float(payload.get("pilot_noise_sigma2", noise)),
        )


@dataclass(frozen=True)
class ComplexChannelDraw:
    values: Mapping[int, complex]
    stats: Mapping[int, tuple[complex, float]] = field(default_factory=dict)

    def weights(self) -> dict[int, float]:
        """h_j = |ξ_j|² / Σ_q |ξ_q|²."""
        powers = {j: abs(v) ** 2 for j, v in self.values.items()}
        total = math.fsum(powers.values())
        return {j: p / total for j, p in powers.items()}


def draw_complex(
    transmitters, rng: np.random.Generator, mean: complex = 0.0, variance: float = 1.0
) -> ComplexChannelDraw:
    """Circular complex Gaussian ξ_j with the given mean and variance."""
    ordered = sorted(set(transmitters))
    sd = math.sqrt(variance / 2.0)
    parts = rng.standard_normal((len(ordered), 2))
    values = {j: complex(mean + sd * (a + 1j * b)) for j, (a, b) in zip(ordered, parts)}
    return ComplexChannelDraw(values, {j: (mean, variance) for j in ordered})


def lift_draw(
    draw: CoefficientDraw, model: ChannelModel, rng: np.random.Generator
) -> ComplexChannelDraw:
    """Attach uniform phases to real coefficient magnitudes."""
    ordered = sorted(draw.values)
    phases = rng.uniform(0.0, 2.0 * np.pi, len(ordered))
    values = {j: draw.values[j] * complex(np.exp(1j * t)) for j, t in zip(ordered, phases)}
    power = model.power()
    return ComplexChannelDraw(values, {j: (0.0, power) for j in ordered})


def _unit_phases(m: int, rng: np.random.Generator) -> np.ndarray:
    return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, m))


def _complex_noise(shape, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    if sigma2 == 0:
        return np.zeros(shape, dtype=complex)
    sd = math.sqrt(sigma2 / 2.0)
    return sd * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def modulate(cfg: BasebandConfig, x: float, rng: np.random.Generator) -> np.ndarray:
    """Amplitude √Φ(x) on M unit-modulus random-phase symbols."""
    return math.sqrt(scale(cfg.ranges, x)) * _unit_phases(cfg.m, rng)


def pilot_wave(cfg: BasebandConfig, rng: np.random.Generator) -> np.ndarray:
    return _unit_phases(cfg.m, rng)


def receive_raw(
    cfg: BasebandConfig,
    waves: Mapping[int, np.ndarray],
    draw: ComplexChannelDraw,
    rng: np.random.Generator,
    sigma2: Optional[float] = None,
) -> np.ndarray:
    """r[m] = Σ_j ξ_j ω_j[m] + η[m], η complex Gaussian of variance σ²."""
    if set(waves) != set(draw.values):
        raise ValueError(
            f"waves keyed by {sorted(waves)} but coefficients drawn for {sorted(draw.values)}"
        )
    sigma2 = cfg.noise_sigma2 if sigma2 is None else sigma2
    r = np.zeros(cfg.m, dtype=complex)
    for j in sorted(waves):
        w = np.asarray(waves[j])
        if w.shape != (cfg.m,):
            raise ValueError(f"transmitter {j}: expected {cfg.m} symbols, got shape {w.shape}")
        r += draw.values[j] * w
    return r + _complex_noise(cfg.m, sigma2, rng)


def gamma(cfg: BasebandConfig, r: np.ndarray, sigma2: float) -> float:
    """Γ(r) = ‖r‖²/M − σ²."""
    r = np.asarray(r)
    if r.shape != (cfg.m,):
        raise ValueError(f"expected {cfg.m} symbols, got shape {r.shape}")
    return float(np.vdot(r, r).real) / cfg.m - sigma2


def estimate_fhat(
    cfg: BasebandConfig,
    states: Mapping[int, float],
    draw: ComplexChannelDraw,
    rng: np.random.Generator,
) -> float:
    """Run one data + pilot round end to end and return f̂ = Ψ(γ, γ') / γ'."""
    if not states:
        raise ValueError("no transmitter broadcast this round")
    ordered = sorted(states)
    waves = {j: modulate(cfg, states[j], rng) for j in ordered}
    pilots = {j: pilot_wave(cfg, rng) for j in ordered}
    r = receive_raw(cfg, waves, draw, rng, cfg.noise_sigma2)
    r_pilot = receive_raw(cfg, pilots, draw, rng, cfg.pilot_noise_sigma2)

    g = gamma(cfg, r, cfg.noise_sigma2)
    g_pilot = gamma(cfg, r_pilot, cfg.pilot_noise_sigma2)
    if g_pilot <= 0:
        raise SnrViolationError(f"pilot estimate γ' = {g_pilot:.3e} <= 0")

    psi = (g - cfg.ranges.beta * g_pilot) / cfg.ranges.alpha
    return psi / g_pilot


def noise_moments(
    cfg: BasebandConfig,
    mus: Mapping[int, float],
    draw_stats: Mapping[int, tuple[complex, float]],
) -> tuple[float, float]:
    """Closed-form mean and variance of the noise term of ‖r‖²/M.

    The variance is that of (Δ1 + Δ2 + Δ3)/√M; divide by M for the variance
    of Δ itself.
    """
    s2 = cfg.noise_sigma2
    ordered = sorted(mus)
    c = {j: draw_stats[j][1] - abs(draw_stats[j][0]) ** 2 for j in ordered}
    mu2 = {j: mus[j] ** 2 for j in ordered}

    cross = math.fsum(
        mu2[j] * mu2[p] * c[j] * c[p]
        for a, j in enumerate(ordered)
        for p in ordered[a + 1:]
    )
    mixed = math.fsum(mu2[j] * c[j] for j in ordered)
    return s2, 2.0 * cross + 2.0 * s2 * mixed + s2**2


def delta_samples(
    cfg: BasebandConfig,
    mus: Mapping[int, float],
    draw_stats: Mapping[int, tuple[complex, float]],
    trials: int,
    rng: np.random.Generator,
    batch: int = 1000,
) -> np.ndarray:
    """Monte-Carlo realizations of Δ = ‖r‖²/M − Σ_j μ_j² |ξ_j|².

    Each realization redraws the coefficients, the symbol phases and the noise.
    """
    ordered = sorted(mus)
    mu = np.array([mus[j] for j in ordered])
    means = np.array([draw_stats[j][0] for j in ordered], dtype=complex)
    sds = np.sqrt(np.array([draw_stats[j][1] for j in ordered]) / 2.0)
    n = len(ordered)

    out = []
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        xi = means + sds * (rng.standard_normal((b, n)) + 1j * rng.standard_normal((b, n)))
        nu = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, (b, n, cfg.m)))
        eta = _complex_noise((b, cfg.m), cfg.noise_sigma2, rng)
        r = np.einsum("bn,bnm->bm", xi * mu, nu) + eta
        received = np.sum(np.abs(r) ** 2, axis=1) / cfg.m
        desired = np.sum((mu**2) * np.abs(xi) ** 2, axis=1)
        out.append(received - desired)
        done += b
    return np.concatenate(out)


def fhat_error_samples(
    cfg: BasebandConfig,
    states: Mapping[int, float],
    trials: int,
    rng: np.random.Generator,
    mean: complex = 0.0,
    variance: float = 1.0,
) -> np.ndarray:
    """Empirical f̂ − Σ h_j x_j over independent channel and symbol draws."""
    errors = np.empty(trials)
    for t in range(trials):
        draw = draw_complex(states, rng, mean, variance)
        target = math.fsum(h * states[j] for j, h in draw.weights().items())
        errors[t] = estimate_fhat(cfg, states, draw, rng) - target
    return errors


retry_decorator = tenacity.retry(
    retry=tenacity.retry_if_exception_type(SnrViolationError),
    wait=tenacity.wait_none(),
    stop=tenacity.stop_after_attempt(BASEBAND_RETRIES),
    before_sleep=lambda state: logger.debug(
        "SNR violation, retransmitting round (attempt %d)", state.attempt_number
    ),
    reraise=True,
)


class BasebandLink:
    """Protocol backend running the full M-symbol transceiver for every round.

    Real coefficient magnitudes from the channel module get uniform phases; a
    round whose pilot estimate is unusable is retransmitted with fresh noise.
    The output is projected onto S, the codomain of Ψ.
    """

    name = "baseband"

    def __init__(self, cfg: BasebandConfig, model: ChannelModel):
        self.cfg = cfg
        self.model = model

    @retry_decorator
    def _round(self, states, draw: ComplexChannelDraw, rng: np.random.Generator) -> float:
        return estimate_fhat(self.cfg, states, draw, rng)

    def receive(
        self,
        states: Mapping[int, float],
        draw: CoefficientDraw,
        rng: Optional[np.random.Generator] = None,
    ) -> float:
        if rng is None:
            raise ValueError("the baseband link needs a generator for phases and noise")
        lifted = lift_draw(draw, self.model, rng)
        f_hat = self._round(states, lifted, rng)
        return min(max(f_hat, self.cfg.ranges.s_min), self.cfg.ranges.s_max)
