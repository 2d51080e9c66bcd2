"""dB/linear conversions and frequency-mismatch helpers.

All dB values use the power convention 10*log10. Frequency offsets are in
Hz, delays in seconds, wavelengths in nm where stated.
"""
from __future__ import annotations

import math

LIGHT_SPEED_M_PER_S = 299_792_458.0

TWO_PI = 2.0 * math.pi


def db_to_linear(value_db: float) -> float:
    """Linear power ratio for a dB value: 10**(dB/10)."""
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    """dB value of a positive linear power ratio."""
    if value <= 0.0:
        raise ValueError(f"linear ratio must be positive, got {value}")
    return 10.0 * math.log10(value)


def v_omega(freq_offset_hz: float, delta_t_s: float) -> float:
    """Frequency-mismatch factor cos(2*pi*f*dT) of an interferer.

    Equals cos^2(w*dT/2) - sin^2(w*dT/2) with w = 2*pi*f; lies in [-1, 1]
    and is periodic in f with period 1/dT.
    """
    if delta_t_s <= 0.0:
        raise ValueError(f"delta_t_s must be positive, got {delta_t_s}")
    return math.cos(TWO_PI * freq_offset_hz * delta_t_s)


def freq_offset_from_wavelength(delta_lambda_nm: float, center_nm: float = 1550.0) -> float:
    """Carrier frequency offset in Hz for a wavelength shift near center_nm."""
    if center_nm <= 0.0:
        raise ValueError(f"center_nm must be positive, got {center_nm}")
    lam = center_nm * 1e-9
    return LIGHT_SPEED_M_PER_S * (delta_lambda_nm * 1e-9) / (lam * lam)
