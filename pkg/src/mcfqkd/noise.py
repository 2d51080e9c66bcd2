"""Stochastic frequency-jitter sampling and averaged interference cosines.

The phase noise of an interferer is a zero-mean frequency deviation f with
RMS width sigma; it enters the interference phase as 4*pi*f*delta_t. For
Gaussian noise the expected cosine has the closed form
E[cos(theta + 4*pi*f*dT)] = cos(theta) * exp(-8*pi^2*sigma^2*dT^2),
which serves as the exact oracle for the Monte-Carlo average.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .units import TWO_PI


class NoiseDistribution(str, Enum):
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class NoiseSpec:
    """Zero-mean frequency jitter with RMS width sigma_hz."""

    sigma_hz: float
    distribution: NoiseDistribution = NoiseDistribution.GAUSSIAN

    def __post_init__(self) -> None:
        if self.sigma_hz < 0.0:
            raise ValueError(f"sigma_hz must be >= 0, got {self.sigma_hz}")


@dataclass(frozen=True)
class McConfig:
    """Sample count and master seed of a Monte-Carlo run."""

    n_samples: int
    master_seed: int

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")
        if not (0 <= self.master_seed < 2**64):
            raise ValueError(f"master_seed must be a 64-bit unsigned int, got {self.master_seed}")


def substream(master_seed: int, source_index: int = 0) -> np.random.Generator:
    """Independent generator for one source.

    Streams are keyed by (master_seed, source_index), so appending a source
    to a scene never perturbs the draws of the existing ones, and a stream's
    first n draws do not depend on how many are requested later.
    """
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(source_index,))
    return np.random.default_rng(seq)


def sample_freq_noise(spec: NoiseSpec, mc: McConfig, source_index: int = 0) -> np.ndarray:
    """n_samples i.i.d. frequency deviations in Hz; zeros exactly for sigma 0."""
    if spec.sigma_hz == 0.0:
        return np.zeros(mc.n_samples)
    if spec.distribution is not NoiseDistribution.GAUSSIAN:
        raise NotImplementedError(f"unsupported noise distribution: {spec.distribution}")
    rng = substream(mc.master_seed, source_index)
    return rng.normal(0.0, spec.sigma_hz, mc.n_samples)


def averaged_cos(
    theta: float,
    spec: NoiseSpec,
    delta_t_s: float,
    mc: McConfig,
    source_index: int = 0,
) -> tuple[float, float]:
    """Monte-Carlo mean and standard error of cos(theta + 4*pi*f*dT).

    theta is reduced modulo 2*pi (IEEE remainder, exact), so shifting it by
    an exactly-representable multiple of 2*pi cannot change the result. The
    sigma = 0 case returns the exact cosine with zero standard error.
    """
    if delta_t_s <= 0.0:
        raise ValueError(f"delta_t_s must be positive, got {delta_t_s}")
    theta_r = math.remainder(theta, TWO_PI)
    if spec.sigma_hz == 0.0:
        return math.cos(theta_r), 0.0
    x = sample_freq_noise(spec, mc, source_index)
    x *= 2.0 * TWO_PI * delta_t_s
    x += theta_r
    np.cos(x, out=x)
    mean = float(x.mean())
    if mc.n_samples < 2:
        return mean, 0.0
    std_err = float(x.std(ddof=1) / math.sqrt(mc.n_samples))
    return mean, std_err


def damping_factor(spec: NoiseSpec, delta_t_s: float) -> float:
    """Exact Gaussian attenuation exp(-8*pi^2*sigma^2*dT^2) of the mean cosine."""
    if delta_t_s <= 0.0:
        raise ValueError(f"delta_t_s must be positive, got {delta_t_s}")
    if spec.distribution is not NoiseDistribution.GAUSSIAN:
        raise NotImplementedError(f"unsupported noise distribution: {spec.distribution}")
    s = 2.0 * TWO_PI * spec.sigma_hz * delta_t_s
    return math.exp(-0.5 * s * s)
