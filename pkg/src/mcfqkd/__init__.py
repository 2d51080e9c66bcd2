"""Crosstalk, phase-noise and key-loss-threshold modeling for QKD channels
in multicore fiber, with a split-step beam-propagation solver for
trench-assisted cross-section design."""

__version__ = "0.1.0"

from .bpm import (
    BpmGrid,
    BpmInstabilityError,
    build_index_map,
    ComplexField,
    core_powers,
    CrosstalkReport,
    crosstalk_study,
    FiberCrossSection,
    launch_mode,
    mode_field_radius_um,
    propagate,
    relax_mode,
    v_number,
)
from .channel import ChannelParams, CrosstalkScene, CrosstalkSource, scene_from_fractions
from .noise import (
    averaged_cos,
    damping_factor,
    McConfig,
    NoiseDistribution,
    NoiseSpec,
    sample_freq_noise,
    substream,
)
from .threshold import (
    find_psr_position,
    find_threshold,
    infinite_noise_scale,
    mean_effective_cos,
    psr_map,
    snr_curve,
    SweepGrid,
    SweepPoint,
    ThresholdKind,
    ThresholdResult,
    threshold_vs_noise,
)
from .units import (
    db_to_linear,
    freq_offset_from_wavelength,
    LIGHT_SPEED_M_PER_S,
    linear_to_db,
    v_omega,
)
from .visibility import qber_estimate, visibility_avg, visibility_mc, VisibilityEstimate

__all__ = [
    "__version__",
    "averaged_cos",
    "BpmGrid",
    "BpmInstabilityError",
    "build_index_map",
    "ChannelParams",
    "ComplexField",
    "core_powers",
    "CrosstalkReport",
    "crosstalk_study",
    "CrosstalkScene",
    "CrosstalkSource",
    "damping_factor",
    "db_to_linear",
    "FiberCrossSection",
    "find_psr_position",
    "find_threshold",
    "freq_offset_from_wavelength",
    "infinite_noise_scale",
    "launch_mode",
    "LIGHT_SPEED_M_PER_S",
    "linear_to_db",
    "McConfig",
    "mean_effective_cos",
    "mode_field_radius_um",
    "NoiseDistribution",
    "NoiseSpec",
    "propagate",
    "psr_map",
    "qber_estimate",
    "relax_mode",
    "sample_freq_noise",
    "scene_from_fractions",
    "snr_curve",
    "substream",
    "SweepGrid",
    "SweepPoint",
    "ThresholdKind",
    "ThresholdResult",
    "threshold_vs_noise",
    "v_number",
    "v_omega",
    "visibility_avg",
    "visibility_mc",
    "VisibilityEstimate",
]
