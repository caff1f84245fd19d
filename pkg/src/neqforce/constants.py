"""Physical constants (CODATA, via scipy) and derived thermal scales."""

from dataclasses import dataclass

from scipy.constants import c as _c, hbar as _hbar, k as _k_B


@dataclass(frozen=True)
class PhysicalConstants:
    """Compiled-in CODATA values used throughout the force kernels."""

    hbar: float = _hbar   # J s
    c: float = _c         # m/s
    k_B: float = _k_B     # J/K


CONSTANTS = PhysicalConstants()

HBAR = CONSTANTS.hbar
C = CONSTANTS.c
K_B = CONSTANTS.k_B

# Peak of the thermal spectral weight x^3/(e^x - 1); used to pick the
# representative frequency for validity checks.
WIEN_X = 2.8214393721220787


def thermal_wavelength(temperature):
    """hbar*c/(k_B*T) in meters; inf at T = 0."""
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if temperature == 0:
        return float("inf")
    return HBAR * C / (K_B * temperature)


def thermal_peak_frequency(temperature):
    """Frequency (rad/s) where the thermal weight peaks; 0 at T = 0."""
    return WIEN_X * K_B * temperature / HBAR
