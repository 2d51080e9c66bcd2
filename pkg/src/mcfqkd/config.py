"""Run-configuration schema, diagnostics, and domain-object builders.

Configs are JSON documents with a ``command`` key; unknown keys anywhere in
the document are rejected. ``validate_config`` returns every schema
violation and physics warning without running anything; builders raise
ConfigError with the offending key path in the message.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .bpm import (
    BpmGrid,
    FiberCrossSection,
    PARAXIAL_CONTRAST_LIMIT,
    SINGLE_MODE_V_LIMIT,
    v_number,
)
from .channel import ChannelParams, CrosstalkSource
from .units import db_to_linear, freq_offset_from_wavelength

COMMANDS = (
    "visibility",
    "threshold",
    "psr-sweep",
    "psr-map",
    "snr-curve",
    "bpm-crosstalk",
    "trench-study",
)

MC_COMMANDS = ("visibility",)  # commands that always sample; others only with method "mc"


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending key."""


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    key: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.key}: {self.message}"


_PARAMS_KEYS = {"d1", "d2", "delta_t_s", "alpha_db", "visibility_threshold"}
_SOURCE_COMMON = {"noise_scale", "freq_offset_hz", "v_omega", "wavelength_offset_nm"}
_XS_KEYS = {
    "lattice",
    "pitch_um",
    "core_radius_um",
    "core_dn",
    "trench_width_um",
    "trench_dn",
    "cladding_index",
    "cladding_diameter_um",
}
_GRID_KEYS = {
    "nx",
    "ny",
    "dx_um",
    "dy_um",
    "dz_um",
    "wavelength_um",
    "reference_index",
    "absorber_width_um",
}

_TOP_KEYS: dict[str, set[str]] = {
    "visibility": {
        "command",
        "seed",
        "output_dir",
        "n_samples",
        "baseline_qber",
        "params",
        "sigma_values_hz",
        "scenes",
    },
    "threshold": {
        "command",
        "seed",
        "output_dir",
        "n_samples",
        "method",
        "params",
        "sigma_values_hz",
        "sources",
    },
    "psr-sweep": {
        "command",
        "seed",
        "output_dir",
        "n_samples",
        "method",
        "params",
        "sigma_values_hz",
        "sources",
    },
    "snr-curve": {
        "command",
        "seed",
        "output_dir",
        "n_samples",
        "method",
        "params",
        "sigma_values_hz",
        "sources",
    },
    "psr-map": {
        "command",
        "seed",
        "output_dir",
        "params",
        "sigma_values_hz",
        "weight_fracs",
        "noise_scales",
        "v_w1_values",
        "v_w2_values",
    },
    "bpm-crosstalk": {
        "command",
        "seed",
        "output_dir",
        "cross_section",
        "grid",
        "distance_um",
        "launch_core",
        "settle_steps",
        "settle_dz_um",
        "export_fields",
    },
    "trench-study": {
        "command",
        "seed",
        "output_dir",
        "cross_section",
        "grid",
        "distance_um",
        "launch_core",
        "settle_steps",
        "settle_dz_um",
        "variants",
    },
}


def _unknown_key_diags(doc: dict, allowed: set[str], prefix: str) -> list[Diagnostic]:
    return [
        Diagnostic("error", f"{prefix}{key}", "unknown key")
        for key in doc
        if key not in allowed
    ]


def _require(doc: dict, key: str, diags: list[Diagnostic], prefix: str = "") -> bool:
    if key not in doc:
        diags.append(Diagnostic("error", f"{prefix}{key}", "required key is missing"))
        return False
    return True


def _number(doc, key, diags, prefix="", *, required=True, default=None):
    if key not in doc:
        if required:
            diags.append(Diagnostic("error", f"{prefix}{key}", "required key is missing"))
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        diags.append(Diagnostic("error", f"{prefix}{key}", f"expected a number, got {value!r}"))
        return default
    return float(value)


def _integer(doc, key, diags, prefix="", *, required=True, default=None):
    if key not in doc:
        if required:
            diags.append(Diagnostic("error", f"{prefix}{key}", "required key is missing"))
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, int):
        diags.append(Diagnostic("error", f"{prefix}{key}", f"expected an integer, got {value!r}"))
        return default
    return value


def build_params(doc, diags, prefix="params.") -> ChannelParams | None:
    if doc is None:
        return ChannelParams()
    if not isinstance(doc, dict):
        diags.append(Diagnostic("error", prefix.rstrip("."), "expected an object"))
        return None
    diags.extend(_unknown_key_diags(doc, _PARAMS_KEYS, prefix))
    defaults = ChannelParams()
    kwargs = {}
    for key, default in (
        ("d1", defaults.d1),
        ("d2", defaults.d2),
        ("delta_t_s", defaults.delta_t_s),
        ("alpha_db", defaults.alpha_db),
        ("visibility_threshold", defaults.visibility_threshold),
    ):
        kwargs[key] = _number(doc, key, diags, prefix, required=False, default=default)
    try:
        return ChannelParams(**kwargs)
    except ValueError as exc:
        diags.append(Diagnostic("error", prefix.rstrip("."), str(exc)))
        return None


def _source_freq(doc, params, diags, prefix) -> float | None:
    given = [k for k in ("freq_offset_hz", "v_omega", "wavelength_offset_nm") if k in doc]
    if len(given) != 1:
        diags.append(
            Diagnostic(
                "error",
                prefix.rstrip("."),
                "need exactly one of freq_offset_hz, v_omega, wavelength_offset_nm",
            )
        )
        return None
    key = given[0]
    value = _number(doc, key, diags, prefix)
    if value is None:
        return None
    if key == "freq_offset_hz":
        return value
    if key == "wavelength_offset_nm":
        return freq_offset_from_wavelength(value)
    if not (-1.0 <= value <= 1.0):
        diags.append(Diagnostic("error", f"{prefix}v_omega", f"must lie in [-1, 1], got {value}"))
        return None
    return CrosstalkSource.from_v_omega(1.0, value, params.delta_t_s).freq_offset_hz


def build_scene_sources(
    docs, params, diags, *, weight_mode: str, prefix: str
) -> tuple[CrosstalkSource, ...] | None:
    """Sources from config entries.

    weight_mode "power_rel" reads absolute relative powers; "weight_frac"
    reads weight fractions that must sum to 1 and converts them so that the
    scene has unit total weight.
    """
    if not isinstance(docs, list):
        diags.append(Diagnostic("error", prefix, "expected a list of sources"))
        return None
    weight_key = "power_rel" if weight_mode == "power_rel" else "weight_frac"
    allowed = _SOURCE_COMMON | {weight_key}
    sources = []
    fracs = []
    ok = True
    for i, sdoc in enumerate(docs):
        sprefix = f"{prefix}[{i}]."
        if not isinstance(sdoc, dict):
            diags.append(Diagnostic("error", sprefix.rstrip("."), "expected an object"))
            ok = False
            continue
        diags.extend(_unknown_key_diags(sdoc, allowed, sprefix))
        weight = _number(sdoc, weight_key, diags, sprefix)
        scale = _number(sdoc, "noise_scale", diags, sprefix, required=False, default=1.0)
        freq = _source_freq(sdoc, params, diags, sprefix) if params else None
        if weight is None or scale is None or freq is None:
            ok = False
            continue
        if weight < 0.0:
            diags.append(Diagnostic("error", f"{sprefix}{weight_key}", "must be >= 0"))
            ok = False
            continue
        if scale < 0.0:
            diags.append(Diagnostic("error", f"{sprefix}noise_scale", "must be >= 0"))
            ok = False
            continue
        fracs.append(weight)
        power = weight if weight_mode == "power_rel" else weight / db_to_linear(params.alpha_db)
        sources.append(CrosstalkSource(power, freq, scale))
    if not ok:
        return None
    if weight_mode == "weight_frac" and abs(sum(fracs) - 1.0) > 1e-9:
        diags.append(
            Diagnostic("error", prefix, f"weight fractions must sum to 1, got {sum(fracs)!r}")
        )
        return None
    return tuple(sources)


def _check_sigma_values(doc, diags, *, increasing: bool, prefix="") -> list[float] | None:
    if not _require(doc, "sigma_values_hz", diags, prefix):
        return None
    values = doc["sigma_values_hz"]
    if not isinstance(values, list) or not values:
        diags.append(
            Diagnostic("error", f"{prefix}sigma_values_hz", "expected a non-empty list of numbers")
        )
        return None
    out = []
    ok = True
    for i, value in enumerate(values):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            diags.append(
                Diagnostic("error", f"{prefix}sigma_values_hz[{i}]", f"expected a number, got {value!r}")
            )
            ok = False
            continue
        if value < 0:
            diags.append(
                Diagnostic("error", f"{prefix}sigma_values_hz[{i}]", f"sigma_hz must be >= 0, got {value}")
            )
            ok = False
            continue
        out.append(float(value))
    if ok and increasing and any(b <= a for a, b in zip(out, out[1:])):
        diags.append(
            Diagnostic("error", f"{prefix}sigma_values_hz", "values must be strictly increasing")
        )
        ok = False
    return out if ok else None


def _check_seed(doc, diags, *, required: bool) -> None:
    if "seed" not in doc:
        if required:
            diags.append(
                Diagnostic("error", "seed", "seed is required for Monte-Carlo commands")
            )
        return
    seed = doc["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or not (0 <= seed < 2**64):
        diags.append(Diagnostic("error", "seed", f"expected a 64-bit unsigned integer, got {seed!r}"))


def build_cross_section(doc, diags, prefix="cross_section.") -> FiberCrossSection | None:
    if not isinstance(doc, dict):
        diags.append(Diagnostic("error", prefix.rstrip("."), "expected an object"))
        return None
    diags.extend(_unknown_key_diags(doc, _XS_KEYS, prefix))
    defaults = FiberCrossSection()
    kwargs = {}
    lattice = doc.get("lattice", defaults.lattice)
    if not isinstance(lattice, str):
        diags.append(Diagnostic("error", f"{prefix}lattice", f"expected a string, got {lattice!r}"))
        return None
    kwargs["lattice"] = lattice
    for key in ("pitch_um", "core_radius_um", "core_dn", "trench_width_um",
                "trench_dn", "cladding_index", "cladding_diameter_um"):
        kwargs[key] = _number(doc, key, diags, prefix, required=False, default=getattr(defaults, key))
    try:
        xs = FiberCrossSection(**kwargs)
    except ValueError as exc:
        diags.append(Diagnostic("error", prefix.rstrip("."), str(exc)))
        return None
    if xs.core_dn > PARAXIAL_CONTRAST_LIMIT or xs.trench_dn > PARAXIAL_CONTRAST_LIMIT:
        diags.append(
            Diagnostic(
                "warning",
                f"{prefix}core_dn",
                f"index contrast exceeds the paraxial limit {PARAXIAL_CONTRAST_LIMIT}",
            )
        )
    return xs


def build_grid(doc, diags, prefix="grid.") -> BpmGrid | None:
    if doc is None:
        return BpmGrid()
    if not isinstance(doc, dict):
        diags.append(Diagnostic("error", prefix.rstrip("."), "expected an object"))
        return None
    diags.extend(_unknown_key_diags(doc, _GRID_KEYS, prefix))
    defaults = BpmGrid()
    kwargs = {}
    for key in ("nx", "ny"):
        kwargs[key] = _integer(doc, key, diags, prefix, required=False, default=getattr(defaults, key))
    for key in ("dx_um", "dy_um", "dz_um", "wavelength_um", "reference_index", "absorber_width_um"):
        kwargs[key] = _number(doc, key, diags, prefix, required=False, default=getattr(defaults, key))
    try:
        return BpmGrid(**kwargs)
    except (ValueError, TypeError) as exc:
        diags.append(Diagnostic("error", prefix.rstrip("."), str(exc)))
        return None


def _validate_bpm_common(doc, diags) -> None:
    xs = None
    if _require(doc, "cross_section", diags):
        xs = build_cross_section(doc["cross_section"], diags)
    grid = build_grid(doc.get("grid"), diags)
    if xs is not None and grid is not None:
        limit = 2.0 * xs.core_radius_um / 8.0
        if grid.dx_um > limit or grid.dy_um > limit:
            diags.append(
                Diagnostic(
                    "error",
                    "grid.dx_um",
                    f"grid steps must be <= {limit:g} um to resolve the core",
                )
            )
        if v_number(xs, grid.wavelength_um) > SINGLE_MODE_V_LIMIT:
            diags.append(
                Diagnostic(
                    "warning",
                    "cross_section.core_dn",
                    f"core V-number exceeds {SINGLE_MODE_V_LIMIT} (multimode core)",
                )
            )
        half_window = min((grid.nx // 2) * grid.dx_um, (grid.ny // 2) * grid.dy_um)
        reach = max(
            float(math.hypot(cx, cy)) for cx, cy in xs.core_centers()
        ) + xs.core_radius_um + xs.trench_width_um
        if reach + grid.absorber_width_um > half_window:
            diags.append(
                Diagnostic(
                    "error",
                    "grid.nx",
                    "computational window too small for the cross-section plus absorber",
                )
            )
    distance = _number(doc, "distance_um", diags)
    if distance is not None and distance <= 0.0:
        diags.append(Diagnostic("error", "distance_um", f"must be positive, got {distance}"))
    launch = _integer(doc, "launch_core", diags, required=False, default=0)
    if launch is not None and xs is not None and not (0 <= launch < len(xs.core_centers())):
        diags.append(Diagnostic("error", "launch_core", f"core index {launch} out of range"))
    settle = _integer(doc, "settle_steps", diags, required=False, default=1200)
    if settle is not None and settle < 0:
        diags.append(Diagnostic("error", "settle_steps", "must be >= 0"))
    settle_dz = _number(doc, "settle_dz_um", diags, required=False, default=5.0)
    if settle_dz is not None and settle_dz <= 0.0:
        diags.append(Diagnostic("error", "settle_dz_um", "must be positive"))


def validate_config(doc) -> list[Diagnostic]:
    """All schema violations and physics warnings of a run config."""
    diags: list[Diagnostic] = []
    if not isinstance(doc, dict):
        return [Diagnostic("error", "", "config must be a JSON object")]
    command = doc.get("command")
    if command not in COMMANDS:
        return [
            Diagnostic(
                "error", "command", f"expected one of {', '.join(COMMANDS)}, got {command!r}"
            )
        ]
    diags.extend(_unknown_key_diags(doc, _TOP_KEYS[command], ""))
    if "output_dir" in doc and not isinstance(doc["output_dir"], str):
        diags.append(Diagnostic("error", "output_dir", "expected a string path"))

    params = build_params(doc.get("params"), diags)

    if command == "visibility":
        _check_seed(doc, diags, required=True)
        n_samples = _integer(doc, "n_samples", diags)
        if n_samples is not None and n_samples < 1:
            diags.append(Diagnostic("error", "n_samples", "must be >= 1"))
        qber0 = _number(doc, "baseline_qber", diags, required=False, default=0.02)
        if qber0 is not None and not (0.0 <= qber0 < 0.5):
            diags.append(Diagnostic("error", "baseline_qber", "must lie in [0, 0.5)"))
        _check_sigma_values(doc, diags, increasing=False)
        scenes = doc.get("scenes")
        if not isinstance(scenes, list) or not scenes:
            diags.append(Diagnostic("error", "scenes", "expected a non-empty list"))
        elif params is not None:
            for i, sdoc in enumerate(scenes):
                sprefix = f"scenes[{i}]."
                if not isinstance(sdoc, dict):
                    diags.append(Diagnostic("error", sprefix.rstrip("."), "expected an object"))
                    continue
                diags.extend(_unknown_key_diags(sdoc, {"id", "sources"}, sprefix))
                if "id" in sdoc and not isinstance(sdoc["id"], str):
                    diags.append(Diagnostic("error", f"{sprefix}id", "expected a string"))
                if _require(sdoc, "sources", diags, sprefix):
                    build_scene_sources(
                        sdoc["sources"], params, diags,
                        weight_mode="power_rel", prefix=f"{sprefix}sources",
                    )

    elif command in ("threshold", "psr-sweep", "snr-curve"):
        method = doc.get("method", "avg")
        if method not in ("avg", "mc"):
            diags.append(Diagnostic("error", "method", f"expected 'avg' or 'mc', got {method!r}"))
        if method == "mc":
            _check_seed(doc, diags, required=True)
            n_samples = _integer(doc, "n_samples", diags)
            if n_samples is not None and n_samples < 1:
                diags.append(Diagnostic("error", "n_samples", "must be >= 1"))
        else:
            _check_seed(doc, diags, required=False)
        _check_sigma_values(doc, diags, increasing=True)
        if _require(doc, "sources", diags):
            if isinstance(doc["sources"], list) and not doc["sources"]:
                diags.append(
                    Diagnostic(
                        "error",
                        "sources",
                        "threshold undefined without a crosstalk shape (no sources)",
                    )
                )
            elif params is not None:
                build_scene_sources(
                    doc["sources"], params, diags, weight_mode="weight_frac", prefix="sources"
                )
        if params is not None and command in ("psr-sweep", "snr-curve"):
            if params.baseline_visibility <= params.visibility_threshold:
                diags.append(
                    Diagnostic(
                        "error",
                        "params",
                        "baseline visibility must exceed visibility_threshold for sweeps",
                    )
                )

    elif command == "psr-map":
        _check_seed(doc, diags, required=False)
        _check_sigma_values(doc, diags, increasing=True)
        fracs = doc.get("weight_fracs")
        scales = doc.get("noise_scales")
        for key, value in (("weight_fracs", fracs), ("noise_scales", scales)):
            if not isinstance(value, list) or len(value) != 2 or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
            ):
                diags.append(Diagnostic("error", key, "expected a list of two numbers"))
        if isinstance(fracs, list) and len(fracs) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in fracs
        ):
            if abs(sum(fracs) - 1.0) > 1e-9:
                diags.append(Diagnostic("error", "weight_fracs", "fractions must sum to 1"))
        for key in ("v_w1_values", "v_w2_values"):
            values = doc.get(key)
            if not isinstance(values, list) or not values:
                diags.append(Diagnostic("error", key, "expected a non-empty list of numbers"))
                continue
            for i, value in enumerate(values):
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    diags.append(Diagnostic("error", f"{key}[{i}]", "expected a number"))
                elif not (-1.0 <= value <= 1.0):
                    diags.append(Diagnostic("error", f"{key}[{i}]", "must lie in [-1, 1]"))
        if params is not None and params.baseline_visibility <= params.visibility_threshold:
            diags.append(
                Diagnostic(
                    "error",
                    "params",
                    "baseline visibility must exceed visibility_threshold for sweeps",
                )
            )

    elif command == "bpm-crosstalk":
        _check_seed(doc, diags, required=False)
        _validate_bpm_common(doc, diags)
        export = doc.get("export_fields", False)
        if not isinstance(export, bool):
            diags.append(Diagnostic("error", "export_fields", "expected true or false"))

    elif command == "trench-study":
        _check_seed(doc, diags, required=False)
        _validate_bpm_common(doc, diags)
        variants = doc.get("variants")
        if not isinstance(variants, list) or not variants:
            diags.append(Diagnostic("error", "variants", "expected a non-empty list"))
        else:
            for i, vdoc in enumerate(variants):
                vprefix = f"variants[{i}]."
                if not isinstance(vdoc, dict):
                    diags.append(Diagnostic("error", vprefix.rstrip("."), "expected an object"))
                    continue
                diags.extend(_unknown_key_diags(vdoc, {"trench_width_um", "dn"}, vprefix))
                width = _number(vdoc, "trench_width_um", diags, vprefix)
                dn = _number(vdoc, "dn", diags, vprefix)
                if width is not None and width < 0.0:
                    diags.append(Diagnostic("error", f"{vprefix}trench_width_um", "must be >= 0"))
                if dn is not None and dn <= 0.0:
                    diags.append(Diagnostic("error", f"{vprefix}dn", "must be positive"))
                if dn is not None and dn > PARAXIAL_CONTRAST_LIMIT:
                    diags.append(
                        Diagnostic(
                            "warning",
                            f"{vprefix}dn",
                            f"index contrast exceeds the paraxial limit {PARAXIAL_CONTRAST_LIMIT}",
                        )
                    )

    return diags


def errors_of(diags) -> list[Diagnostic]:
    return [d for d in diags if d.severity == "error"]
