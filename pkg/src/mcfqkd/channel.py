"""Receiver-interferometer constants and crosstalk-source descriptions.

A crosstalk scene bundles the receiver parameters with any number of
interfering sources. Each source enters the interference model with the
dimensionless weight w_i = linear(alpha_db) * power_rel_i, a deterministic
phase theta_i = 2*pi*freq_offset_hz*delta_t, and a phase-noise width
sigma_i = noise_scale_i * global_sigma_hz.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .units import TWO_PI, db_to_linear, v_omega


@dataclass(frozen=True)
class ChannelParams:
    """Constants of the receiving delay-line interferometer.

    d1 and d2 are the click probabilities of the clean channel; the baseline
    visibility is (d2 - d1)/(d2 + d1). delta_t_s is the interferometer delay,
    alpha_db the fitted crosstalk-to-signal normalization, and
    visibility_threshold the fraction below which key generation stops.
    """

    d1: float = 0.01
    d2: float = 0.99
    delta_t_s: float = 50e-12
    alpha_db: float = 15.0
    visibility_threshold: float = 0.80

    def __post_init__(self) -> None:
        if not (0.0 <= self.d1 < self.d2 <= 1.0):
            raise ValueError(f"need 0 <= d1 < d2 <= 1, got d1={self.d1}, d2={self.d2}")
        if self.delta_t_s <= 0.0:
            raise ValueError(f"delta_t_s must be positive, got {self.delta_t_s}")
        if not (0.0 < self.visibility_threshold < 1.0):
            raise ValueError(
                f"visibility_threshold must lie in (0, 1), got {self.visibility_threshold}"
            )

    @property
    def delta_d(self) -> float:
        return self.d2 - self.d1

    @property
    def sum_d(self) -> float:
        return self.d2 + self.d1

    @property
    def baseline_visibility(self) -> float:
        return self.delta_d / self.sum_d


@dataclass(frozen=True)
class CrosstalkSource:
    """One interfering core's signal.

    power_rel is the source power relative to the unit quantum-signal
    normalization, freq_offset_hz its carrier offset from the quantum
    channel, and noise_scale the multiplier applied to the scene's global
    phase-noise width.
    """

    power_rel: float
    freq_offset_hz: float = 0.0
    noise_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.power_rel < 0.0:
            raise ValueError(f"power_rel must be >= 0, got {self.power_rel}")
        if self.noise_scale < 0.0:
            raise ValueError(f"noise_scale must be >= 0, got {self.noise_scale}")

    def phase(self, delta_t_s: float) -> float:
        """Deterministic interference phase theta = 2*pi*f*dT."""
        return TWO_PI * self.freq_offset_hz * delta_t_s

    def v_omega(self, delta_t_s: float) -> float:
        """Frequency-mismatch factor cos(theta) of this source."""
        return v_omega(self.freq_offset_hz, delta_t_s)

    @classmethod
    def from_v_omega(
        cls,
        power_rel: float,
        v_omega_value: float,
        delta_t_s: float,
        noise_scale: float = 1.0,
    ) -> "CrosstalkSource":
        """Source whose carrier offset realizes a given mismatch factor.

        Picks the smallest non-negative offset with cos(2*pi*f*dT) equal to
        the requested value.
        """
        if not (-1.0 <= v_omega_value <= 1.0):
            raise ValueError(f"v_omega must lie in [-1, 1], got {v_omega_value}")
        if delta_t_s <= 0.0:
            raise ValueError(f"delta_t_s must be positive, got {delta_t_s}")
        freq = math.acos(v_omega_value) / (TWO_PI * delta_t_s)
        return cls(power_rel=power_rel, freq_offset_hz=freq, noise_scale=noise_scale)


@dataclass(frozen=True)
class CrosstalkScene:
    """A channel plus its interfering sources and global phase-noise width."""

    params: ChannelParams = field(default_factory=ChannelParams)
    sources: tuple[CrosstalkSource, ...] = ()
    global_sigma_hz: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "sources", tuple(self.sources))
        if self.global_sigma_hz < 0.0:
            raise ValueError(f"global_sigma_hz must be >= 0, got {self.global_sigma_hz}")

    def weights(self) -> np.ndarray:
        """Dimensionless weights w_i = linear(alpha_db) * power_rel_i."""
        alpha = db_to_linear(self.params.alpha_db)
        return np.array([alpha * s.power_rel for s in self.sources], dtype=float)

    def total_weight(self) -> float:
        return float(self.weights().sum())

    def sigma_for(self, index: int) -> float:
        return self.sources[index].noise_scale * self.global_sigma_hz

    def scaled(self, factor: float) -> "CrosstalkScene":
        """Scene with every source power (hence every weight) scaled."""
        if factor < 0.0:
            raise ValueError(f"scale factor must be >= 0, got {factor}")
        scaled_sources = tuple(
            CrosstalkSource(
                power_rel=s.power_rel * factor,
                freq_offset_hz=s.freq_offset_hz,
                noise_scale=s.noise_scale,
            )
            for s in self.sources
        )
        return CrosstalkScene(self.params, scaled_sources, self.global_sigma_hz)


def scene_from_fractions(
    params: ChannelParams,
    fractions,
    v_omegas=None,
    freq_offsets_hz=None,
    noise_scales=None,
    global_sigma_hz: float = 0.0,
) -> CrosstalkScene:
    """Unit-total-weight scene from weight fractions.

    Exactly one of v_omegas / freq_offsets_hz selects the carrier offsets.
    power_rel values are chosen so that sum(w_i) = 1, which makes the
    threshold solver's scale variable directly comparable across scenes.
    """
    fractions = list(fractions)
    if (v_omegas is None) == (freq_offsets_hz is None):
        raise ValueError("provide exactly one of v_omegas or freq_offsets_hz")
    if noise_scales is None:
        noise_scales = [1.0] * len(fractions)
    noise_scales = list(noise_scales)
    offsets = list(v_omegas) if v_omegas is not None else list(freq_offsets_hz)
    if not (len(fractions) == len(offsets) == len(noise_scales)):
        raise ValueError("fractions, offsets and noise_scales must have equal lengths")
    alpha = db_to_linear(params.alpha_db)
    sources = []
    for frac, off, scale in zip(fractions, offsets, noise_scales):
        if frac < 0.0:
            raise ValueError(f"weight fractions must be >= 0, got {frac}")
        if v_omegas is not None:
            src = CrosstalkSource.from_v_omega(frac / alpha, off, params.delta_t_s, scale)
        else:
            src = CrosstalkSource(frac / alpha, off, scale)
        sources.append(src)
    return CrosstalkScene(params, tuple(sources), global_sigma_hz)
