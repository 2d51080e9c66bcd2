"""Figure rendering for the CLI report path.

Figures are written as SVG next to the CSV artifacts; the Agg backend and a
fixed hash salt keep the output reproducible on headless machines.
"""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams["svg.hashsalt"] = "mcfqkd"
plt.rcParams["figure.figsize"] = (6.4, 4.2)


def save_figure(fig, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)


def _sigma_axis(ax, sigmas) -> None:
    positive = [s for s in sigmas if s > 0]
    if positive and min(positive) > 0 and len(positive) == len(sigmas):
        ax.set_xscale("log")
    ax.set_xlabel("phase noise width $\\sigma$ (Hz)")


def visibility_figure(rows):
    """rows: (scene_id, sigma_hz, v_mean, v_stderr, qber)."""
    fig, ax = plt.subplots()
    scenes: dict[str, list] = {}
    for scene_id, sigma, mean, stderr, _ in rows:
        scenes.setdefault(str(scene_id), []).append((sigma, mean, stderr))
    for scene_id, pts in scenes.items():
        pts.sort()
        sig = [p[0] for p in pts]
        ax.errorbar(sig, [p[1] for p in pts], yerr=[p[2] for p in pts], label=scene_id, marker="o")
    _sigma_axis(ax, [r[1] for r in rows])
    ax.set_ylabel("visibility")
    ax.grid(True, alpha=0.3)
    ax.legend()
    return fig


def _shade_no_effect(ax, points) -> None:
    sig = [p.sigma_hz for p in points]
    flags = [not math.isfinite(p.normalized) for p in points]
    start = None
    for i, flag in enumerate(flags):
        if flag and start is None:
            start = i
        if (not flag or i == len(flags) - 1) and start is not None:
            end = i if flag else i - 1
            ax.axvspan(sig[start], sig[end], color="gold", alpha=0.3)
            start = None


def threshold_figure(points, *, ylabel="normalized threshold"):
    """points: SweepPoint sequence; unbounded stretches are shaded."""
    fig, ax = plt.subplots()
    finite = [(p.sigma_hz, p.normalized) for p in points if math.isfinite(p.normalized)]
    if finite:
        ax.plot([f[0] for f in finite], [f[1] for f in finite], marker=".")
    _shade_no_effect(ax, points)
    _sigma_axis(ax, [p.sigma_hz for p in points])
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return fig


def snr_figure(points):
    fig, ax = plt.subplots()
    finite = [(p.sigma_hz, p.threshold_db) for p in points if math.isfinite(p.threshold_db)]
    if finite:
        ax.plot([f[0] for f in finite], [f[1] for f in finite], marker=".")
    _shade_no_effect(ax, points)
    _sigma_axis(ax, [p.sigma_hz for p in points])
    ax.set_ylabel("SNR: threshold crosstalk (dB)")
    ax.grid(True, alpha=0.3)
    return fig


def psr_map_figure(vw1_values, vw2_values, sigma_star):
    fig, ax = plt.subplots()
    data = np.ma.masked_invalid(np.asarray(sigma_star, dtype=float))
    mesh = ax.pcolormesh(
        np.asarray(vw2_values, dtype=float),
        np.asarray(vw1_values, dtype=float),
        data,
        shading="nearest",
    )
    fig.colorbar(mesh, ax=ax, label="resonance position $\\sigma^*$ (Hz)")
    ax.set_xlabel("$V_{\\omega 2}$")
    ax.set_ylabel("$V_{\\omega 1}$")
    return fig


def trench_study_figure(reports):
    """Worst-neighbor crosstalk vs trench width, one line per index step."""
    fig, ax = plt.subplots()
    by_dn: dict[float, list] = {}
    for rep in reports:
        by_dn.setdefault(rep.dn, []).append((rep.trench_width_um, rep.worst_crosstalk_db))
    for dn, pts in sorted(by_dn.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"dn = {dn:g}")
    ax.set_xlabel("trench width (um)")
    ax.set_ylabel("crosstalk (dB)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    return fig


def field_intensity_figure(field, *, floor_db: float = -120.0):
    """Log-scale intensity image of a propagated field."""
    grid = field.grid
    intensity = field.amplitudes.real**2 + field.amplitudes.imag**2
    peak = intensity.max()
    if peak <= 0:
        db = np.full_like(intensity, floor_db)
    else:
        db = 10.0 * np.log10(np.maximum(intensity / peak, 10 ** (floor_db / 10.0)))
    fig, ax = plt.subplots()
    extent = [
        grid.x_axis()[0],
        grid.x_axis()[-1],
        grid.y_axis()[0],
        grid.y_axis()[-1],
    ]
    image = ax.imshow(db.T, origin="lower", extent=extent, cmap="magma")
    fig.colorbar(image, ax=ax, label="intensity (dB rel. peak)")
    ax.set_xlabel("x (um)")
    ax.set_ylabel("y (um)")
    return fig


def index_map_figure(index_map, grid):
    fig, ax = plt.subplots()
    extent = [
        grid.x_axis()[0],
        grid.x_axis()[-1],
        grid.y_axis()[0],
        grid.y_axis()[-1],
    ]
    image = ax.imshow(np.real(index_map).T, origin="lower", extent=extent, cmap="viridis")
    fig.colorbar(image, ax=ax, label="refractive index")
    ax.set_xlabel("x (um)")
    ax.set_ylabel("y (um)")
    return fig
