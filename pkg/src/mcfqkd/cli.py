"""Command-line front end.

Runs are driven by JSON config files (see configs/ for examples); CLI flags
override file values. Every command writes one primary CSV plus a
run_meta.json capturing the fully resolved config; --plot adds SVG figures
rendered from the same rows. Exit codes: 0 success, 1 config error, 2
numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .bpm import (
    BpmInstabilityError,
    build_index_map,
    core_powers,
    crosstalk_study,
    FiberCrossSection,
    launch_mode,
    propagate,
    relax_mode,
)
from .channel import ChannelParams, CrosstalkScene
from .config import (
    build_cross_section,
    build_grid,
    build_params,
    build_scene_sources,
    ConfigError,
    Diagnostic,
    errors_of,
    validate_config,
)
from .noise import McConfig
from .reporting import write_csv, write_csv_grid, write_json, write_pgm
from .threshold import (
    find_psr_position,
    find_threshold,
    infinite_noise_scale,
    psr_map,
    SweepGrid,
    ThresholdKind,
    threshold_vs_noise,
)
from .visibility import qber_estimate, visibility_mc

OUTPUT_DIR_ENV = "MCFQKD_OUTPUT_DIR"

RUN_COMMANDS = (
    "visibility",
    "threshold",
    "psr-sweep",
    "psr-map",
    "snr-curve",
    "bpm-crosstalk",
    "trench-study",
)


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must contain a JSON object")
    return doc


def _parse_override_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(doc: dict, args) -> dict:
    doc = json.loads(json.dumps(doc))  # deep copy, keeps the original untouched
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    if getattr(args, "output_dir", None) is not None:
        doc["output_dir"] = args.output_dir
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, text = item.split("=", 1)
        target = doc
        parts = key.split(".")
        for part in parts[:-1]:
            node = target.get(part)
            if not isinstance(node, dict):
                node = {}
                target[part] = node
            target = node
        target[parts[-1]] = _parse_override_value(text)
    return doc


def _scene_rows_visibility(doc: dict, params: ChannelParams):
    mc = McConfig(doc["n_samples"], doc["seed"])
    baseline_qber = float(doc.get("baseline_qber", 0.02))
    rows = []
    for i, sdoc in enumerate(doc["scenes"]):
        scene_id = sdoc.get("id", f"scene{i}")
        sources = build_scene_sources(
            sdoc["sources"], params, [], weight_mode="power_rel", prefix="sources"
        )
        if sources is None:
            raise ConfigError(f"scenes[{i}].sources failed to build")
        for sigma in doc["sigma_values_hz"]:
            scene = CrosstalkScene(params, sources, float(sigma))
            est = visibility_mc(scene, mc)
            qber = qber_estimate(scene, baseline_qber)
            rows.append((scene_id, float(sigma), est.mean, est.std_err, qber))
    return rows


def _sweep_grid(doc: dict, params: ChannelParams) -> SweepGrid:
    sources = build_scene_sources(
        doc["sources"], params, [], weight_mode="weight_frac", prefix="sources"
    )
    if sources is None:
        raise ConfigError("sources failed to build")
    template = CrosstalkScene(params, sources, 0.0)
    return SweepGrid(tuple(float(s) for s in doc["sigma_values_hz"]), template)


def _threshold_rows(doc: dict, params: ChannelParams):
    """Rows (sigma_hz, kind, s_star, s_star_db, normalized) for one scene.

    Unlike the sweep commands, a plain threshold run tolerates a baseline at
    or below the visibility threshold (rows classify as always_below and the
    normalization column stays empty).
    """
    method = doc.get("method", "avg")
    mc = McConfig(doc["n_samples"], doc["seed"]) if method == "mc" else None
    solver = "mc" if method == "mc" else "closed"
    sources = build_scene_sources(
        doc["sources"], params, [], weight_mode="weight_frac", prefix="sources"
    )
    if sources is None:
        raise ConfigError("sources failed to build")
    try:
        s_inf = infinite_noise_scale(params)
    except ValueError:
        s_inf = None
    rows = []
    for sigma in doc["sigma_values_hz"]:
        scene = CrosstalkScene(params, sources, float(sigma))
        result = find_threshold(scene, method=solver, mc=mc)
        if result.kind is ThresholdKind.CROSSING:
            normalized = result.scale / s_inf if s_inf else None
            rows.append(
                (float(sigma), result.kind.value, result.scale,
                 10.0 * math.log10(result.scale), normalized)
            )
        elif result.kind is ThresholdKind.NO_EFFECT:
            rows.append((float(sigma), result.kind.value, None, math.inf, math.inf))
        else:
            rows.append((float(sigma), result.kind.value, None, None, None))
    return rows


def _sweep_rows(doc: dict, params: ChannelParams):
    method = doc.get("method", "avg")
    mc = McConfig(doc["n_samples"], doc["seed"]) if method == "mc" else None
    solver = "mc" if method == "mc" else "closed"
    grid = _sweep_grid(doc, params)
    points = threshold_vs_noise(grid, method=solver, mc=mc)
    rows = [
        (p.sigma_hz, p.kind.value, p.scale, p.threshold_db, p.normalized) for p in points
    ]
    return rows, points, grid


def _psr_map_rows(doc: dict, params: ChannelParams):
    from .channel import scene_from_fractions

    template = scene_from_fractions(
        params,
        doc["weight_fracs"],
        v_omegas=[0.0, 0.0],
        noise_scales=doc["noise_scales"],
    )
    grid = SweepGrid(tuple(float(s) for s in doc["sigma_values_hz"]), template)
    vw1 = [float(v) for v in doc["v_w1_values"]]
    vw2 = [float(v) for v in doc["v_w2_values"]]
    sigma_star = psr_map(vw1, vw2, grid)
    rows = []
    for i, v1 in enumerate(vw1):
        for j, v2 in enumerate(vw2):
            value = sigma_star[i, j]
            rows.append((v1, v2, None if math.isnan(value) else value))
    return rows, (vw1, vw2, sigma_star)


def _bpm_single(doc: dict):
    xs = build_cross_section(doc["cross_section"], [])
    grid = build_grid(doc.get("grid"), [])
    if xs is None or grid is None:
        raise ConfigError("cross_section/grid failed to build")
    launch = int(doc.get("launch_core", 0))
    settle_steps = int(doc.get("settle_steps", 1200))
    settle_dz = float(doc.get("settle_dz_um", 5.0))
    distance = float(doc["distance_um"])
    reports = crosstalk_study(
        [xs], distance, grid,
        launch_core=launch, settle_steps=settle_steps, settle_dz_um=settle_dz,
    )
    return xs, grid, reports[0], launch, settle_steps, settle_dz, distance


def _bpm_rows(report):
    row = [report.variant, report.trench_width_um, report.dn]
    row.extend(report.crosstalk_db)
    row.append(report.absorbed_fraction)
    header = ["variant", "trench_width_um", "dn"]
    header.extend(f"crosstalk_db_core{k}" for k in report.neighbor_cores)
    header.append("absorbed_fraction")
    return header, row


def _trench_study(doc: dict):
    base = build_cross_section(doc["cross_section"], [])
    grid = build_grid(doc.get("grid"), [])
    if base is None or grid is None:
        raise ConfigError("cross_section/grid failed to build")
    variants = []
    for vdoc in doc["variants"]:
        width = float(vdoc["trench_width_um"])
        dn = float(vdoc["dn"])
        variants.append(
            replace(
                base,
                trench_width_um=width,
                trench_dn=dn if width > 0 else 0.0,
                core_dn=dn,
            )
        )
    reports = crosstalk_study(
        variants,
        float(doc["distance_um"]),
        grid,
        launch_core=int(doc.get("launch_core", 0)),
        settle_steps=int(doc.get("settle_steps", 1200)),
        settle_dz_um=float(doc.get("settle_dz_um", 5.0)),
    )
    return grid, reports


def _resolve_output_dir(doc: dict) -> Path:
    out = doc.get("output_dir") or os.environ.get(OUTPUT_DIR_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def run(doc: dict, *, plot: bool = False) -> int:
    """Execute a validated config document; returns the process exit code."""
    diags = validate_config(doc)
    for diag in diags:
        stream = sys.stderr if diag.severity == "error" else sys.stdout
        print(diag, file=stream)
    if errors_of(diags):
        return 1

    command = doc["command"]
    out_dir = _resolve_output_dir(doc)
    meta: dict = {"command": command, "config": doc, "version": __version__}
    outputs: list[str] = []
    figures: list[tuple[str, object]] = []

    try:
        params = build_params(doc.get("params"), [])
        if command == "visibility":
            rows = _scene_rows_visibility(doc, params)
            header = ["scene_id", "sigma_hz", "v_mean", "v_stderr", "qber"]
            csv_name = "visibility.csv"
            if plot:
                from . import plotting

                figures.append(("visibility.svg", plotting.visibility_figure(rows)))

        elif command == "threshold":
            rows = _threshold_rows(doc, params)
            header = ["sigma_hz", "kind", "s_star", "s_star_db", "normalized"]
            csv_name = "threshold.csv"

        elif command in ("psr-sweep", "snr-curve"):
            rows, points, grid = _sweep_rows(doc, params)
            header = ["sigma_hz", "kind", "s_star", "s_star_db", "normalized"]
            csv_name = "psr_sweep.csv" if command == "psr-sweep" else "snr_curve.csv"
            if command == "psr-sweep":
                position = find_psr_position(grid)
                meta["psr_sigma_star_hz"] = position
            if plot:
                from . import plotting

                if command == "psr-sweep":
                    figures.append(("psr_sweep.svg", plotting.threshold_figure(points)))
                else:
                    figures.append(("snr_curve.svg", plotting.snr_figure(points)))

        elif command == "psr-map":
            rows, (vw1, vw2, sigma_star) = _psr_map_rows(doc, params)
            header = ["v_w1", "v_w2", "sigma_star_hz"]
            csv_name = "psr_map.csv"
            if plot:
                from . import plotting

                figures.append(("psr_map.svg", plotting.psr_map_figure(vw1, vw2, sigma_star)))

        elif command == "bpm-crosstalk":
            xs, grid, report, launch, settle_steps, settle_dz, distance = _bpm_single(doc)
            header, row = _bpm_rows(report)
            rows = [row]
            csv_name = "bpm_crosstalk.csv"
            meta["core_fractions"] = list(report.core_fractions)
            if doc.get("export_fields", False) or plot:
                index_map = build_index_map(xs, grid)
                seed = launch_mode(launch, xs, grid)
                if settle_steps > 0:
                    iso = build_index_map(xs, grid, only_cores=(launch,))
                    mode, _ = relax_mode(seed, iso, steps=settle_steps, dz_um=settle_dz)
                else:
                    mode = seed
                out_field = propagate(mode, index_map, distance)
                intensity = out_field.amplitudes.real**2 + out_field.amplitudes.imag**2
                if doc.get("export_fields", False):
                    write_pgm(out_dir / "index_map.pgm", index_map)
                    write_pgm(out_dir / "intensity.pgm", intensity)
                    write_csv_grid(out_dir / "index_map.csv", index_map)
                    write_csv_grid(out_dir / "intensity.csv", intensity)
                    outputs += ["index_map.pgm", "intensity.pgm", "index_map.csv", "intensity.csv"]
                if plot:
                    from . import plotting

                    figures.append(("bpm_intensity.svg", plotting.field_intensity_figure(out_field)))
                    figures.append(("bpm_index_map.svg", plotting.index_map_figure(index_map, grid)))

        elif command == "trench-study":
            grid, reports = _trench_study(doc)
            header, _ = _bpm_rows(reports[0])
            rows = [_bpm_rows(rep)[1] for rep in reports]
            csv_name = "trench_study.csv"
            if plot:
                from . import plotting

                figures.append(("trench_study.svg", plotting.trench_study_figure(reports)))

        else:  # pragma: no cover - validate_config guards this
            raise ConfigError(f"unknown command {command!r}")

    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (BpmInstabilityError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2

    write_csv(out_dir / csv_name, header, rows)
    outputs.append(csv_name)
    if figures:
        from .plotting import save_figure

        for name, fig in figures:
            save_figure(fig, out_dir / name)
            outputs.append(name)
    meta["outputs"] = sorted(outputs + ["run_meta.json"])
    write_json(out_dir / "run_meta.json", meta)
    print(f"{command}: wrote {', '.join(sorted(outputs))} to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcfqkd",
        description="Crosstalk, phase-noise and key-loss modeling for QKD in multicore fiber",
    )
    parser.add_argument("--version", action="version", version=f"mcfqkd {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_run_parser(name: str, help_text: str):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("-c", "--config", required=True, help="JSON run configuration")
        p.add_argument("-o", "--output-dir", help=f"output directory (default: ${OUTPUT_DIR_ENV} or .)")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--plot", action="store_true", help="also render SVG figures")
        p.add_argument(
            "--set",
            action="append",
            metavar="KEY=VALUE",
            help="override a (dotted) config key; VALUE parsed as JSON when possible",
        )
        return p

    add_run_parser("visibility", "Monte-Carlo visibility and QBER of crosstalk scenes")
    add_run_parser("threshold", "key-loss threshold of one scene over a noise grid")
    add_run_parser("psr-sweep", "normalized threshold vs noise width (resonance sweep)")
    add_run_parser("psr-map", "resonance positions over two mismatch-factor grids")
    add_run_parser("snr-curve", "threshold crosstalk in dB vs noise width")
    add_run_parser("bpm-crosstalk", "beam-propagation crosstalk of one cross-section")
    add_run_parser("trench-study", "beam-propagation crosstalk across trench variants")

    v = sub.add_parser("validate", help="check a config without running it")
    v.add_argument("-c", "--config", required=True, help="JSON run configuration")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc = load_config(args.config)
        if args.subcommand == "validate":
            diags = validate_config(doc)
            for diag in diags:
                print(diag)
            return 1 if errors_of(diags) else 0
        doc = apply_overrides(doc, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.subcommand != doc.get("command"):
        print(
            f"error: command: config declares {doc.get('command')!r} "
            f"but the {args.subcommand!r} subcommand was invoked",
            file=sys.stderr,
        )
        return 1
    return run(doc, plot=args.plot)


def entry() -> None:  # console-script entry point
    sys.exit(main())
