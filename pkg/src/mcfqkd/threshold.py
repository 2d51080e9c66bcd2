"""Key-loss threshold location and phase-stochastic-resonance sweeps.

With the weight fractions of a scene held fixed and every weight scaled by
s, the averaged visibility is the monotone rational function

    V(s) = (dD + s*Cbar) / (sD + s),   Cbar = sum_i f_i cos(theta_i) damp_i,

running from the baseline V(0) = dD/sD to the asymptote Cbar. The crossing
of the visibility threshold t therefore has the closed form
s* = (t*sD - dD)/(Cbar - t); when Cbar >= t the crosstalk can never pull
the channel below threshold (no effect), and when the baseline is already
at or below t no crossing exists. Thresholds are normalized against the
infinite-noise asymptote s_inf = (dD - t*sD)/t, i.e. the closed form with
Cbar = 0. A resonance is an interior maximum of the normalized threshold
over the noise width sigma; since the normalized threshold is t/(t - Cbar),
a strictly increasing transform of Cbar(sigma), peaks are located on
Cbar(sigma) directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable

import numpy as np

from .channel import ChannelParams, CrosstalkScene, CrosstalkSource
from .noise import McConfig, NoiseSpec, damping_factor
from .units import TWO_PI
from .visibility import visibility_avg, visibility_mc


class ThresholdKind(str, Enum):
    CROSSING = "crossing"
    ALWAYS_BELOW = "always_below"
    NO_EFFECT = "no_effect"


@dataclass(frozen=True)
class ThresholdResult:
    """Classification of a scene's key-loss threshold.

    scale is the weight multiplier s* at the crossing and inv_threshold its
    reciprocal; both are None unless kind is CROSSING.
    """

    kind: ThresholdKind
    scale: float | None = None
    inv_threshold: float | None = None


def mean_effective_cos(scene: CrosstalkScene) -> float:
    """Weight-averaged damped cosine Cbar of a scene; 0 for an empty scene."""
    weights = scene.weights()
    total_w = float(weights.sum())
    if total_w == 0.0:
        return 0.0
    p = scene.params
    acc = 0.0
    for i, src in enumerate(scene.sources):
        theta_r = math.remainder(src.phase(p.delta_t_s), TWO_PI)
        damp = damping_factor(NoiseSpec(scene.sigma_for(i)), p.delta_t_s)
        acc += float(weights[i]) * math.cos(theta_r) * damp
    return acc / total_w


def infinite_noise_scale(params: ChannelParams) -> float:
    """Threshold scale at fully-damped crosstalk, s_inf = (dD - t*sD)/t."""
    t = params.visibility_threshold
    s_inf = (params.delta_d - t * params.sum_d) / t
    if s_inf <= 0.0:
        raise ValueError(
            "baseline visibility does not exceed the threshold; "
            "infinite-noise normalization undefined"
        )
    return s_inf


def _bisect_scale(visibility_of_scale: Callable[[float], float], t: float, rel_tol: float) -> float:
    """Bisection root of V(s) = t for a strictly decreasing V with V(0) > t."""
    hi = 1.0
    for _ in range(200):
        if visibility_of_scale(hi) < t:
            break
        hi *= 2.0
    else:
        raise RuntimeError("failed to bracket the threshold crossing")
    lo = 0.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if visibility_of_scale(mid) >= t:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_threshold(
    scene: CrosstalkScene,
    *,
    method: str = "closed",
    mc: McConfig | None = None,
    rel_tol: float = 1e-9,
) -> ThresholdResult:
    """Locate the weight scale at which visibility drops to the threshold.

    method "closed" evaluates the exact crossing of the averaged model;
    "bisect" solves the same model by bisection to rel_tol; "mc" bisects
    over the Monte-Carlo visibility (mc config required, fixed seed makes
    the objective deterministic). The classification is total: scenes whose
    baseline does not exceed the threshold are ALWAYS_BELOW, scenes whose
    asymptotic visibility stays at or above it are NO_EFFECT.
    """
    if method not in ("closed", "bisect", "mc"):
        raise ValueError(f"unknown method: {method!r}")
    weights = scene.weights()
    total_w = float(weights.sum())
    if total_w <= 0.0:
        raise ValueError("threshold undefined without a crosstalk shape (no positive weights)")
    p = scene.params
    t = p.visibility_threshold
    if p.baseline_visibility <= t:
        return ThresholdResult(ThresholdKind.ALWAYS_BELOW)
    cbar = mean_effective_cos(scene)
    if cbar >= t:
        return ThresholdResult(ThresholdKind.NO_EFFECT)
    if method == "closed":
        scale = (t * p.sum_d - p.delta_d) / (cbar * total_w - t * total_w)
    elif method == "bisect":
        scale = _bisect_scale(lambda s: visibility_avg(scene.scaled(s)), t, rel_tol)
    else:
        if mc is None:
            raise ValueError("method 'mc' requires a Monte-Carlo config")
        scale = _bisect_scale(lambda s: visibility_mc(scene.scaled(s), mc).mean, t, rel_tol)
    return ThresholdResult(ThresholdKind.CROSSING, scale=scale, inv_threshold=1.0 / scale)


@dataclass(frozen=True)
class SweepGrid:
    """Noise-width grid and a unit-total-weight scene template to sweep."""

    sigma_values_hz: tuple[float, ...]
    scene_template: CrosstalkScene

    def __post_init__(self) -> None:
        object.__setattr__(self, "sigma_values_hz", tuple(self.sigma_values_hz))
        sig = self.sigma_values_hz
        if len(sig) == 0:
            raise ValueError("sigma grid must not be empty")
        if any(s < 0.0 for s in sig):
            raise ValueError("sigma values must be >= 0")
        if any(b <= a for a, b in zip(sig, sig[1:])):
            raise ValueError("sigma values must be strictly increasing")
        total = self.scene_template.total_weight()
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"scene template must have unit total weight, got {total}")


@dataclass(frozen=True)
class SweepPoint:
    """Threshold classification at one noise width.

    threshold_db and normalized are +inf for NO_EFFECT points; normalized
    divides the crossing scale by the infinite-noise asymptote.
    """

    sigma_hz: float
    kind: ThresholdKind
    scale: float | None
    threshold_db: float
    normalized: float


def threshold_vs_noise(
    grid: SweepGrid,
    *,
    method: str = "closed",
    mc: McConfig | None = None,
) -> list[SweepPoint]:
    """Normalized threshold curve over the sigma grid.

    Requires a baseline visibility above the threshold (otherwise the
    normalization point is undefined).
    """
    template = grid.scene_template
    s_inf = infinite_noise_scale(template.params)
    points = []
    for sigma in grid.sigma_values_hz:
        scene = replace(template, global_sigma_hz=sigma)
        result = find_threshold(scene, method=method, mc=mc)
        if result.kind is ThresholdKind.NO_EFFECT:
            points.append(SweepPoint(sigma, result.kind, None, math.inf, math.inf))
        else:
            scale = result.scale
            points.append(
                SweepPoint(sigma, result.kind, scale, 10.0 * math.log10(scale), scale / s_inf)
            )
    return points


def snr_curve(
    grid: SweepGrid,
    *,
    method: str = "closed",
    mc: McConfig | None = None,
) -> list[SweepPoint]:
    """Threshold-in-dB curve over the sigma grid (threshold_db is the SNR)."""
    return threshold_vs_noise(grid, method=method, mc=mc)


def _cbar_at_sigma(grid: SweepGrid) -> Callable[[float], float]:
    template = grid.scene_template
    return lambda sigma: mean_effective_cos(replace(template, global_sigma_hz=sigma))


def find_psr_position(grid: SweepGrid, *, rel_tol: float = 1e-3) -> float | None:
    """Noise width of the interior threshold maximum, or None when absent.

    A three-point test on the grid detects an interior maximum of
    Cbar(sigma) that exceeds both curve endpoints by more than 1e-6
    relative; golden-section refinement then narrows it to rel_tol in
    sigma. The normalized threshold is a strictly increasing function of
    Cbar, so its peaks coincide with the peaks of Cbar even across
    unbounded (no-effect) stretches.
    """
    cbar = _cbar_at_sigma(grid)
    sig = grid.sigma_values_hz
    vals = [cbar(s) for s in sig]
    k = int(np.argmax(vals))
    if k == 0 or k == len(sig) - 1:
        return None
    scale = max(abs(vals[k]), abs(vals[0]), abs(vals[-1]))
    if scale == 0.0:
        return None
    if vals[k] - vals[0] <= 1e-6 * scale or vals[k] - vals[-1] <= 1e-6 * scale:
        return None

    lo, hi = sig[k - 1], sig[k + 1]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = cbar(c), cbar(d)
    while (b - a) > rel_tol * max(b, 1e-300):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = cbar(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = cbar(d)
    return 0.5 * (a + b)


def psr_map(vw1_values, vw2_values, grid: SweepGrid, *, rel_tol: float = 1e-3) -> np.ndarray:
    """Resonance positions over a grid of two-source mismatch factors.

    Entry [i, j] is the interior-maximum noise width for mismatch factors
    (vw1_values[i], vw2_values[j]) applied to the template's two sources;
    NaN encodes "no resonance".
    """
    template = grid.scene_template
    if len(template.sources) != 2:
        raise ValueError(f"psr_map needs a two-source template, got {len(template.sources)}")
    delta_t = template.params.delta_t_s
    out = np.full((len(vw1_values), len(vw2_values)), np.nan)
    for i, v1 in enumerate(vw1_values):
        for j, v2 in enumerate(vw2_values):
            sources = tuple(
                CrosstalkSource.from_v_omega(src.power_rel, v, delta_t, src.noise_scale)
                for src, v in zip(template.sources, (v1, v2))
            )
            scene = replace(template, sources=sources)
            pos = find_psr_position(replace(grid, scene_template=scene), rel_tol=rel_tol)
            if pos is not None:
                out[i, j] = pos
    return out
