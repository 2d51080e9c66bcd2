"""Interference visibility of a QKD receiver under multi-source crosstalk.

The visibility of a scene is

    V = (d2 - d1 + sum_i w_i cos(theta_i + 4*pi*f_i*dT)) / (d2 + d1 + sum_i w_i)

with one independent frequency-jitter term f_i per source. The Monte-Carlo
estimator averages the numerator over per-source noise draws; the averaged
form replaces each cosine by its exact Gaussian expectation. The plain
accidental-click QBER estimate assumes crosstalk clicks are uncorrelated
with the key and err with probability 1/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import CrosstalkScene
from .noise import McConfig, NoiseSpec, damping_factor, sample_freq_noise
from .units import TWO_PI


@dataclass(frozen=True)
class VisibilityEstimate:
    """Monte-Carlo mean visibility with statistical error."""

    mean: float
    std_err: float
    n_samples: int


def visibility_avg(scene: CrosstalkScene) -> float:
    """Noise-averaged visibility using the exact Gaussian cosine expectation."""
    p = scene.params
    dd = p.d2 - p.d1
    sd = p.d2 + p.d1
    total_cos = 0.0
    total_w = 0.0
    weights = scene.weights()
    for i, src in enumerate(scene.sources):
        w = float(weights[i])
        theta_r = math.remainder(src.phase(p.delta_t_s), TWO_PI)
        damp = damping_factor(NoiseSpec(scene.sigma_for(i)), p.delta_t_s)
        total_cos += w * math.cos(theta_r) * damp
        total_w += w
    return (dd + total_cos) / (sd + total_w)


def visibility_mc(scene: CrosstalkScene, mc: McConfig) -> VisibilityEstimate:
    """Monte-Carlo visibility estimate with per-source independent noise.

    Noiseless sources contribute their exact cosine; a scene with no noisy
    source is deterministic and returns zero standard error.
    """
    p = scene.params
    dd = p.d2 - p.d1
    sd = p.d2 + p.d1
    weights = scene.weights()
    total_w = float(weights.sum())
    denom = sd + total_w

    const = dd
    noisy: list[tuple[int, float, float, float]] = []
    for i, src in enumerate(scene.sources):
        sigma = scene.sigma_for(i)
        theta_r = math.remainder(src.phase(p.delta_t_s), TWO_PI)
        if sigma == 0.0:
            const += float(weights[i]) * math.cos(theta_r)
        else:
            noisy.append((i, float(weights[i]), theta_r, sigma))

    if not noisy:
        return VisibilityEstimate(const / denom, 0.0, mc.n_samples)

    acc = np.full(mc.n_samples, const)
    for i, w, theta_r, sigma in noisy:
        x = sample_freq_noise(NoiseSpec(sigma), mc, source_index=i)
        x *= 2.0 * TWO_PI * p.delta_t_s
        x += theta_r
        np.cos(x, out=x)
        x *= w
        acc += x
    acc /= denom
    mean = float(acc.mean())
    std_err = 0.0
    if mc.n_samples > 1:
        std_err = float(acc.std(ddof=1) / math.sqrt(mc.n_samples))
    return VisibilityEstimate(mean, std_err, mc.n_samples)


def qber_estimate(scene: CrosstalkScene, baseline_qber: float = 0.02) -> float:
    """QBER under accidental crosstalk clicks erring with probability 1/2."""
    if not (0.0 <= baseline_qber < 0.5):
        raise ValueError(f"baseline_qber must lie in [0, 0.5), got {baseline_qber}")
    p = scene.params
    sd = p.d2 + p.d1
    total_w = scene.total_weight()
    return (baseline_qber * sd + 0.5 * total_w) / (sd + total_w)
