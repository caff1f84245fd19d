"""Forces on two small spheres at different temperatures.

The total force on sphere 2 decomposes into the equilibrium force at the
environment temperature plus two non-equilibrium deviations: radiation
sourced by sphere 1 (interaction term, decaying as 1/d^2 at large
separation and repulsive there) and radiation sourced by sphere 2 itself,
scattered back by sphere 1 (self term, oscillating in d at the scale of
the material resonances).

Scalar forces use the convention: positive = attraction along the axis.
"""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .constants import C, HBAR, K_B
from .materials import (ValidityWarning, dipole_T, polarizability_imag_axis,
                        response_breakpoints, warn_dipole_validity)
from .quadrature import (ConvergenceWarning, DEFAULT_SETTINGS, IntegralResult,
                         bose_weighted_integral, oscillatory_tail_integral,
                         refined_trapezoid)

__all__ = [
    "TwoSphereSystem", "ForceBreakdown", "ATTRACTION_POSITIVE",
    "interaction_force_F12", "self_force_F22", "equilibrium_force",
    "total_force_on_sphere2", "total_force_on_sphere1",
]

ATTRACTION_POSITIVE = "positive = attraction"

_PREF = HBAR / (C * math.pi)


@dataclass(frozen=True)
class TwoSphereSystem:
    """Two spheres at center-to-center separation d in a shared environment."""

    sphere1: object
    sphere2: object
    separation: float        # m, center to center
    t_env: float = 0.0       # K

    def __post_init__(self):
        if self.separation <= self.sphere1.radius + self.sphere2.radius:
            raise ValueError("separation must exceed the sum of the radii")
        if self.t_env < 0:
            raise ValueError("t_env must be >= 0")
        if self.validity_ratio < 4:
            warnings.warn(
                f"separation/radius ratio {self.validity_ratio:.2f} < 4: "
                "one-reflection treatment degrades at close approach",
                ValidityWarning, stacklevel=2)

    @property
    def validity_ratio(self):
        """d / max(R1, R2); the one-reflection picture needs this >> 1."""
        return self.separation / max(self.sphere1.radius,
                                     self.sphere2.radius)

    def swapped(self):
        return replace(self, sphere1=self.sphere2, sphere2=self.sphere1)


@dataclass
class ForceBreakdown:
    """Decomposition of the axial force on one body (N).

    total = equilibrium + interaction_from_other + self_emission; the sign
    convention is fixed (positive = attraction) and recorded on the
    instance.
    """

    equilibrium: float
    interaction_from_other: float
    self_emission: float
    total: float
    convention: str = ATTRACTION_POSITIVE
    converged: bool = True


def _breakpoints(sys):
    bp = set(response_breakpoints(sys.sphere1.dielectric))
    bp |= set(response_breakpoints(sys.sphere2.dielectric))
    return tuple(sorted(bp))


def _interaction_result(sys, temperature, settings):
    """Bose-weighted spectral integral of the source-1 interaction kernel."""
    d = sys.separation

    def integrand(w):
        t1n, t1m = dipole_T(sys.sphere1, w)
        t2n, t2m = dipole_T(sys.sphere2, w)
        u = C / (w * d)
        sum_re1 = t1n.real + t1m.real
        sum_re2 = t2n.real + t2m.real
        sum_im2 = t2n.imag + t2m.imag
        diag = t1n.real * t2n.imag + t1m.real * t2m.imag
        kern = (9.0 * u ** 2 * sum_re1 * sum_re2
                + sum_re1 * sum_im2 * (9.0 * u ** 3 + 18.0 * u ** 5)
                + 81.0 * u ** 7 * diag)
        return -_PREF * w * kern

    return bose_weighted_integral(integrand, temperature, settings,
                                  breakpoints=_breakpoints(sys))


def _self_result(sys, temperature, settings):
    """Oscillatory spectral integral of the source-2 self-force kernel."""
    if temperature == 0:
        return IntegralResult(0.0, 0.0, 0, True)
    d = sys.separation
    x_scale = HBAR / (K_B * temperature)
    omega_max = settings.bose_cutoff_x / x_scale

    def g(w):
        t1n, t1m = dipole_T(sys.sphere1, w)
        t2n, t2m = dipole_T(sys.sphere2, w)
        u = C / (w * d)
        u2, u3 = u * u, u ** 3
        u4, u5, u6, u7 = u ** 4, u ** 5, u ** 6, u ** 7

        def bracket(tp, tq):
            # tp: scatterer amplitude of the same polarization as the
            # source term, tq: the opposite polarization.
            return ((tp - tq) * (9.0 * u2 + 27.0j * u3)
                    - (tp - 0.5 * tq) * 72.0 * u4
                    - (tp - 0.125 * tq) * 144.0j * u5
                    + tp * (162.0 * u6 + 81.0j * u7))

        h = (t2n.real * bracket(t1n, t1m)
             + t2m.real * bracket(t1m, t1n))
        return _PREF * w * h / np.expm1(x_scale * w)

    res = oscillatory_tail_integral(g, 2.0 * d / C, omega_max, settings,
                                    breakpoints=_breakpoints(sys))
    res.value = res.value.real
    return res


# Kernel polynomial of the dipole-dipole equilibrium force: with
# P(x) = 3 + 6x + 5x^2 + 2x^3 + x^4 the free energy per Matsubara mode is
# -2 k_B T alpha1 alpha2 exp(-2x) P(x)/d^6, and d/dd of that mode gives
# G(x) = 6 P + 2 x P - x P'.
def _force_poly(x):
    return (18.0 + x * (36.0 + x * (32.0 + x * (16.0 + x * (6.0 + 2.0 * x)))))


def _equilibrium_kernel(sys, xi):
    d = sys.separation
    a1 = polarizability_imag_axis(sys.sphere1, xi)
    a2 = polarizability_imag_axis(sys.sphere2, xi)
    x = np.asarray(xi, dtype=float) * d / C
    return (2.0 / d ** 7) * a1 * a2 * np.exp(-2.0 * x) * _force_poly(x)


def _equilibrium_result(sys, temperature, settings):
    if temperature > 0:
        from .quadrature import matsubara_sum
        return matsubara_sum(lambda xi: _equilibrium_kernel(sys, xi),
                             temperature, settings)
    # T = 0: the Matsubara sum becomes (hbar/2 pi) * integral over xi of
    # the same kernel, cut where the exp(-2 xi d/c) factor is negligible.
    xi_max = settings.bose_cutoff_x * C / (2.0 * sys.separation)
    res = refined_trapezoid(lambda xi: _equilibrium_kernel(sys, xi),
                            xi_max, settings)
    res.value = HBAR / (2.0 * math.pi) * res.value
    res.error_estimate *= HBAR / (2.0 * math.pi)
    return res


def _unwrap(result, label):
    if not result.converged:
        warnings.warn(
            f"{label} integral not converged (error estimate "
            f"{result.error_estimate:.3g})", ConvergenceWarning,
            stacklevel=3)
    return float(np.real(result.value))


def interaction_force_F12(sys, temperature, settings=DEFAULT_SETTINGS):
    """Force on sphere 2 from radiation sourced by sphere 1 at T (N).

    Exactly zero at T = 0 and for a lossless source (only lossy spheres
    emit).  The large-d asymptote decays as 1/d^2 and is repulsive.
    """
    return _unwrap(_interaction_result(sys, temperature, settings),
                   "interaction force")


def self_force_F22(sys, temperature, settings=DEFAULT_SETTINGS):
    """Force on sphere 2 from its own radiation scattered by sphere 1 (N).

    Oscillates with separation: the emitted and back-reflected waves
    interfere with phase 2 omega d / c.
    """
    return _unwrap(_self_result(sys, temperature, settings), "self force")


def equilibrium_force(sys, temperature, settings=DEFAULT_SETTINGS):
    """Equilibrium dipole-dipole force at temperature T (N, attractive).

    Matsubara sum over imaginary frequencies for T > 0; the T = 0 limit
    evaluates the same kernel as an integral along the imaginary axis.
    """
    return _unwrap(_equilibrium_result(sys, temperature, settings),
                   "equilibrium force")


def _total(sys, settings):
    warn_dipole_validity(sys.sphere1,
                         max(sys.sphere1.temperature, sys.t_env))
    warn_dipole_validity(sys.sphere2,
                         max(sys.sphere2.temperature, sys.t_env))
    flags = []

    eq = _equilibrium_result(sys, sys.t_env, settings)
    flags.append(eq.converged)

    t1 = sys.sphere1.temperature
    if t1 == sys.t_env:
        inter = 0.0
    else:
        hot = _interaction_result(sys, t1, settings)
        cold = _interaction_result(sys, sys.t_env, settings)
        flags += [hot.converged, cold.converged]
        inter = float(hot.value - cold.value)

    t2 = sys.sphere2.temperature
    if t2 == sys.t_env:
        self_term = 0.0
    else:
        hot = _self_result(sys, t2, settings)
        cold = _self_result(sys, sys.t_env, settings)
        flags += [hot.converged, cold.converged]
        self_term = float(np.real(hot.value - cold.value))

    eq_val = float(eq.value)
    return ForceBreakdown(
        equilibrium=eq_val,
        interaction_from_other=inter,
        self_emission=self_term,
        total=eq_val + inter + self_term,
        converged=all(flags),
    )


def total_force_on_sphere2(sys, settings=DEFAULT_SETTINGS):
    """Total force on sphere 2: equilibrium at T_env plus the deviations
    of each source temperature from T_env."""
    return _total(sys, settings)


def total_force_on_sphere1(sys, settings=DEFAULT_SETTINGS):
    """Total force on sphere 1 (indices 1 and 2 interchanged)."""
    return _total(sys.swapped(), settings)
